import random
from collections import Counter


class SubsetSum(VerifiableTask):
    prompt_template = ("From this multiset of integers, where repetitions "
                       "count separately: {values} choose one or more numbers "
                       "whose sum is exactly {target}. Output your chosen "
                       "numbers separated by single spaces.")
    parameter = {"size": "8 + 4*difficulty", "max_value": 50}

    def generate(self, seed, difficulty):
        rng = random.Random(f"subset_sum:{seed}:{difficulty}")
        n = 8 + 4 * difficulty
        k = rng.randint(2, n // 2)
        solution = [rng.randint(1, 50) for _ in range(k)]
        target = sum(solution)
        pool = solution + [rng.randint(1, 50) for _ in range(n - k)]
        rng.shuffle(pool)
        latent = {"multiset": pool, "target": target}
        return latent, sorted(solution)

    def render(self, latent):
        return self.prompt_template.format(
            values=" ".join(map(str, latent["multiset"])), target=latent["target"])

    def process(self, response):
        return parse_int_list(response)

    def score(self, parsed, latent, answer):
        # Any submultiset hitting the target is accepted; the stored answer
        # only guarantees feasibility.
        if not parsed or sum(parsed) != latent["target"]:
            return 0.0
        have = Counter(latent["multiset"])
        need = Counter(parsed)
        if any(need[x] > have[x] for x in need):
            return 0.0
        return 1.0
