import random


def best_value(weights, values, budget):
    """0/1 knapsack optimum by weight-indexed dynamic programming."""
    table = [0] * (budget + 1)
    for weight, value in zip(weights, values):
        for w in range(budget, weight - 1, -1):
            table[w] = max(table[w], table[w - weight] + value)
    return table[budget]


def achievable_values(weights, values, budget):
    """Every total value of some selection within the weight budget."""
    min_weight = {0: 0}
    for weight, value in zip(weights, values):
        updates = {}
        for total, used in min_weight.items():
            if used + weight <= budget:
                candidate = total + value
                if min_weight.get(candidate, budget + 1) > used + weight:
                    updates[candidate] = min(updates.get(candidate, budget + 1),
                                             used + weight)
        for total, used in updates.items():
            if min_weight.get(total, budget + 1) > used:
                min_weight[total] = used
    return set(min_weight)


class Knapsack(VerifiableTask):
    prompt_template = ("Items are listed as weight value pairs: {items}. "
                       "Choose items, each at most once, with total weight at "
                       "most {budget} so the total value is as large as "
                       "possible. Output the maximum achievable total value.")
    parameter = {"items": "4 + 2*difficulty", "max_weight": "9 + 3*difficulty",
                 "max_value": "19 + 10*difficulty"}

    def generate(self, seed, difficulty):
        rng = random.Random(f"knapsack:{seed}:{difficulty}")
        n = 4 + 2 * difficulty
        weights = [rng.randint(1, 9 + 3 * difficulty) for _ in range(n)]
        values = [rng.randint(1, 19 + 10 * difficulty) for _ in range(n)]
        budget = max(weights) + sum(weights) // 3
        latent = {"weights": weights, "values": values, "budget": budget}
        return latent, best_value(weights, values, budget)

    def render(self, latent):
        items = " ".join(f"{w} {v}" for w, v in zip(latent["weights"], latent["values"]))
        return self.prompt_template.format(items=items, budget=latent["budget"])

    def process(self, response):
        return parse_int(response)

    def score(self, parsed, latent, answer):
        if parsed == answer:
            return 1.0
        if 0 < parsed < answer and parsed in achievable_values(
                latent["weights"], latent["values"], latent["budget"]):
            return parsed / answer
        return 0.0
