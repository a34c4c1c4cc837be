import random


def count_dominant_pairs(values):
    """Pairs (i, j), j > i, where values[i] > max(values[i+1..j]).

    For each i that is the count of indices until the first j with
    values[j] >= values[i]; computed with a next-greater-or-equal stack."""
    n = len(values)
    next_geq = [n] * n
    stack = []
    for j in range(n):
        while stack and values[stack[-1]] <= values[j]:
            next_geq[stack.pop()] = j
        stack.append(j)
    return sum(next_geq[i] - i - 1 for i in range(n))


class MonotonicStack(VerifiableTask):
    prompt_template = ("For the array: {values} count the pairs (i, j) with "
                       "j > i where A[i] is strictly greater than every "
                       "element A[i+1] through A[j]. Output the total count.")
    parameter = {"length": "4 + 3*difficulty"}

    def generate(self, seed, difficulty):
        rng = random.Random(f"monotonic_stack:{seed}:{difficulty}")
        values = [rng.randint(0, 49) for _ in range(4 + 3 * difficulty)]
        return values, count_dominant_pairs(values)

    def render(self, values):
        return self.prompt_template.format(values=" ".join(map(str, values)))

    def process(self, response):
        return parse_int(response)

    def score(self, parsed, values, answer):
        return float(parsed == answer)
