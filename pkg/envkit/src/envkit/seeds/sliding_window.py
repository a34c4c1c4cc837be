import random
from collections import deque


def window_minima(values, k):
    """Minimum of every contiguous size-k window via a monotone deque."""
    minima = []
    dq = deque()
    for i, value in enumerate(values):
        while dq and values[dq[-1]] >= value:
            dq.pop()
        dq.append(i)
        if dq[0] <= i - k:
            dq.popleft()
        if i >= k - 1:
            minima.append(values[dq[0]])
    return minima


class SlidingWindow(VerifiableTask):
    prompt_template = ("Given the array: {values} output the minimum of every "
                       "contiguous window of size {k}, in order, separated by "
                       "single spaces.")
    parameter = {"length": "4 + 2*difficulty", "window": "1 + difficulty"}

    def generate(self, seed, difficulty):
        rng = random.Random(f"sliding_window:{seed}:{difficulty}")
        n = 4 + 2 * difficulty
        k = min(1 + difficulty, n)
        values = [rng.randint(0, 99) for _ in range(n)]
        return {"values": values, "k": k}, window_minima(values, k)

    def render(self, latent):
        return self.prompt_template.format(
            values=" ".join(map(str, latent["values"])), k=latent["k"])

    def process(self, response):
        return parse_int_list(response)

    def score(self, parsed, latent, answer):
        return float(parsed == answer)
