import random

MODULI = (10007, 100003, 1000003)


def linear_recurrence_mod(s0, s1, p, q, n, modulus):
    """A[n] mod m for A[k] = p*A[k-1] + q*A[k-2], by matrix exponentiation."""
    if n == 0:
        return s0 % modulus
    def multiply(x, y):
        return (
            (x[0] * y[0] + x[1] * y[2]) % modulus,
            (x[0] * y[1] + x[1] * y[3]) % modulus,
            (x[2] * y[0] + x[3] * y[2]) % modulus,
            (x[2] * y[1] + x[3] * y[3]) % modulus,
        )
    matrix = (p % modulus, q % modulus, 1, 0)
    power = (1, 0, 0, 1)
    exponent = n - 1
    while exponent:
        if exponent & 1:
            power = multiply(power, matrix)
        matrix = multiply(matrix, matrix)
        exponent >>= 1
    return (power[0] * s1 + power[1] * s0) % modulus


class Fibonacci(VerifiableTask):
    prompt_template = ("A sequence is defined by A[0] = {s0}, A[1] = {s1}, "
                       "and A[n] = {p}*A[n-1] + {q}*A[n-2] for n >= 2. "
                       "Compute A[{n}] modulo {m} and output the result.")
    parameter = {"index": "5 + 10*difficulty + jitter", "modulus": "by difficulty tier"}

    def generate(self, seed, difficulty):
        rng = random.Random(f"fibonacci:{seed}:{difficulty}")
        s0, s1 = rng.randint(1, 9), rng.randint(1, 9)
        p, q = rng.randint(1, 9), rng.randint(1, 9)
        n = 5 + 10 * difficulty + rng.randint(0, 5 * difficulty)
        modulus = MODULI[min(difficulty, len(MODULI)) - 1]
        latent = {"s0": s0, "s1": s1, "p": p, "q": q, "n": n, "m": modulus}
        return latent, linear_recurrence_mod(s0, s1, p, q, n, modulus)

    def render(self, latent):
        return self.prompt_template.format(**latent)

    def process(self, response):
        return parse_int(response)

    def score(self, parsed, latent, answer):
        return float(parsed == answer)
