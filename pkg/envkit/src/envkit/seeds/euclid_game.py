import random
from functools import lru_cache


@lru_cache(maxsize=None)
def first_player_wins(a, b):
    """Winner of the subtraction game from (a, b), both >= 1.

    A move replaces the larger number with larger - k*smaller (k >= 1,
    result >= 0); making a number zero wins. When the quotient is at least
    two the mover can choose between two positions with opposite values, so
    only quotient-one positions force recursion."""
    a, b = max(a, b), min(a, b)
    if a % b == 0:
        return True
    if a // b >= 2:
        return True
    return not first_player_wins(b, a - b)


class EuclidGame(VerifiableTask):
    prompt_template = ("Two players play a subtraction game starting from the "
                       "pair ({x}, {y}). On each turn the larger number is "
                       "replaced by the larger minus any positive multiple of "
                       "the smaller, and the result may not go below zero. "
                       "Whoever makes one of the numbers zero wins, and both "
                       "play perfectly. Output 1 if the first player wins, "
                       "otherwise output 2.")
    parameter = {"max_start": "15 + 35*difficulty"}

    def generate(self, seed, difficulty):
        rng = random.Random(f"euclid_game:{seed}:{difficulty}")
        bound = 15 + 35 * difficulty
        x = rng.randint(1, bound)
        y = rng.randint(1, bound)
        winner = 1 if first_player_wins(x, y) else 2
        return {"x": x, "y": y}, {"x": x, "y": y, "winner": winner}

    def render(self, latent):
        return self.prompt_template.format(x=latent["x"], y=latent["y"])

    def process(self, response):
        return parse_int(response)

    def score(self, parsed, latent, answer):
        return float(parsed == answer["winner"])

    def render_answer(self, reference):
        return str(reference["winner"])
