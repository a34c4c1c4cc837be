import random


def count_wide_subsets(intervals, k):
    """Non-empty subsets whose common intersection has length >= k.

    Anchor each subset at its lexicographically largest (start, index)
    interval; any other member must start no later and reach the anchored
    start plus k, giving 2^eligible subsets per valid anchor. O(n^2)."""
    total = 0
    for i, (li, ri) in enumerate(intervals):
        if ri - li < k:
            continue
        eligible = 0
        for j, (lj, rj) in enumerate(intervals):
            if j == i:
                continue
            if (lj, j) < (li, i) and rj >= li + k:
                eligible += 1
        total += 2 ** eligible
    return total


class BoundedIntervalIntersection(VerifiableTask):
    prompt_template = ("Intervals are listed as start end pairs: {intervals}. "
                       "Count the non-empty subsets of these intervals whose "
                       "common intersection has length at least {k}. Output "
                       "the count.")
    parameter = {"intervals": "4 + difficulty", "min_length": "1 + difficulty"}

    def generate(self, seed, difficulty):
        rng = random.Random(f"intervals:{seed}:{difficulty}")
        n = 4 + difficulty
        k = 1 + difficulty
        intervals = []
        for _ in range(n):
            start = rng.randint(0, 20)
            intervals.append([start, start + rng.randint(1, 14)])
        latent = {"intervals": intervals, "k": k}
        return latent, count_wide_subsets([tuple(iv) for iv in intervals], k)

    def render(self, latent):
        text = " ".join(f"{a} {b}" for a, b in latent["intervals"])
        return self.prompt_template.format(intervals=text, k=latent["k"])

    def process(self, response):
        return parse_int(response)

    def score(self, parsed, latent, answer):
        return float(parsed == answer)
