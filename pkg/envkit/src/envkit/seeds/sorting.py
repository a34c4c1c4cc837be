import random


class Sorting(VerifiableTask):
    prompt_template = ("Sort the following integers in ascending order and "
                       "output them separated by single spaces: {values}")
    parameter = {"count": "difficulty", "min_value": 0, "max_value": 99}

    def generate(self, seed, difficulty):
        rng = random.Random(f"sorting:{seed}:{difficulty}")
        values = [rng.randint(0, 99) for _ in range(difficulty)]
        return values, sorted(values)

    def render(self, values):
        return self.prompt_template.format(values=" ".join(map(str, values)))

    def process(self, response):
        return parse_int_list(response)

    def score(self, parsed, values, answer):
        return float(parsed == answer)
