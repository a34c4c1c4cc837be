import random


def nested_recurrence(m, n):
    """Closed forms of the two-argument self-nesting recurrence for m <= 3:
    f(0,n)=n+1, f(1,n)=n+2, f(2,n)=2n+3, f(3,n)=2^(n+3)-3."""
    if m == 0:
        return n + 1
    if m == 1:
        return n + 2
    if m == 2:
        return 2 * n + 3
    if m == 3:
        return 2 ** (n + 3) - 3
    raise ValueError("m above 3 is not supported")


class RecursiveFunction(VerifiableTask):
    prompt_template = ("Define f(m, n) = n + 1 when m = 0; f(m-1, 1) when "
                       "n = 0; and f(m-1, f(m, n-1)) otherwise. Compute "
                       "f({m}, {n}) and output the value.")
    parameter = {"max_m": "min(3, difficulty)", "max_n": "min(6, 2 + difficulty)"}

    def generate(self, seed, difficulty):
        rng = random.Random(f"recursive_function:{seed}:{difficulty}")
        m = rng.randint(0, min(3, difficulty))
        n = rng.randint(0, min(6, 2 + difficulty))
        return {"m": m, "n": n}, nested_recurrence(m, n)

    def render(self, latent):
        return self.prompt_template.format(m=latent["m"], n=latent["n"])

    def process(self, response):
        return parse_int(response)

    def score(self, parsed, latent, answer):
        return float(parsed == answer)
