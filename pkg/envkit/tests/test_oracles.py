"""Independent brute-force oracles against every seed's reference path.

Each oracle here re-derives the answer by definition (enumeration, scans,
game-tree search, naive iteration) and never reuses the seed's algorithm.
"""

import itertools
import json
import sys
from functools import lru_cache

import pytest

from envkit.catalog import load_seed
from envkit.serve import load_namespace
from envkit.catalog import seed_source

sys.setrecursionlimit(100_000)


def namespace(name):
    return load_namespace(seed_source(name))


# ---------------------------------------------------------------------------
# Sorting
# ---------------------------------------------------------------------------

def test_sorting_reference_is_sorted_latent():
    env = load_seed("sorting")
    for seed in range(30):
        for difficulty in (1, 2, 5, 9):
            latent, reference = env.generate(seed, difficulty)
            assert reference == sorted(latent)
            assert len(latent) == difficulty


# ---------------------------------------------------------------------------
# SlidingWindow: definitional per-window scan.
# ---------------------------------------------------------------------------

def test_sliding_window_matches_definitional_scan():
    env = load_seed("sliding_window")
    helper = namespace("sliding_window")["window_minima"]
    for seed in range(25):
        for difficulty in (1, 2, 3, 6):
            latent, reference = env.generate(seed, difficulty)
            values, k = latent["values"], latent["k"]
            expected = [min(values[i:i + k]) for i in range(len(values) - k + 1)]
            assert reference == expected
            assert helper(values, k) == expected


# ---------------------------------------------------------------------------
# MonotonicStack: O(N^2) double-loop definition, N <= 200.
# ---------------------------------------------------------------------------

def quadratic_dominant_pairs(values):
    total = 0
    for i in range(len(values)):
        running_max = None
        for j in range(i + 1, len(values)):
            running_max = values[j] if running_max is None else max(running_max, values[j])
            if values[i] > running_max:
                total += 1
    return total


def test_monotonic_stack_matches_quadratic_definition():
    import random as stdlib_random

    helper = namespace("monotonic_stack")["count_dominant_pairs"]
    rng = stdlib_random.Random(5)
    for trial in range(40):
        n = rng.randint(1, 200)
        values = [rng.randint(0, 30) for _ in range(n)]
        assert helper(values) == quadratic_dominant_pairs(values), values

    env = load_seed("monotonic_stack")
    for seed in range(10):
        latent, reference = env.generate(seed, 3)
        assert reference == quadratic_dominant_pairs(latent)


# ---------------------------------------------------------------------------
# Knapsack: exhaustive subset enumeration, N <= 12.
# ---------------------------------------------------------------------------

def brute_knapsack(weights, values, budget):
    best = 0
    achievable = set()
    n = len(weights)
    for mask in range(1 << n):
        weight = value = 0
        for i in range(n):
            if mask >> i & 1:
                weight += weights[i]
                value += values[i]
        if weight <= budget:
            best = max(best, value)
            achievable.add(value)
    return best, achievable


@pytest.mark.criterion("oracle equivalence: knapsack optimum vs 2^N enumeration (N <= 12)")
def test_knapsack_matches_exhaustive_enumeration():
    env = load_seed("knapsack")
    ns = namespace("knapsack")
    for seed in range(8):
        for difficulty in (1, 2, 3, 4):  # N = 6, 8, 10, 12
            latent, reference = env.generate(seed, difficulty)
            weights, values, budget = latent["weights"], latent["values"], latent["budget"]
            best, achievable = brute_knapsack(weights, values, budget)
            assert reference == best
            assert ns["achievable_values"](weights, values, budget) == achievable


def test_knapsack_partial_credit_semantics():
    env = load_seed("knapsack")
    latent, optimal = env.generate(4, 2)
    weights, values, budget = latent["weights"], latent["values"], latent["budget"]
    _, achievable = brute_knapsack(weights, values, budget)
    suboptimal = sorted(v for v in achievable if 0 < v < optimal)
    assert suboptimal, "fixture needs a graded case"
    claim = suboptimal[-1]
    assert env.score(claim, latent, optimal) == claim / optimal
    assert env.score(optimal, latent, optimal) == 1.0
    assert env.score(optimal + 1, latent, optimal) == 0.0
    unachievable = next(v for v in range(1, optimal) if v not in achievable)
    assert env.score(unachievable, latent, optimal) == 0.0


# ---------------------------------------------------------------------------
# BoundedIntervalIntersection: subset enumeration, N <= 10.
# ---------------------------------------------------------------------------

def brute_wide_subsets(intervals, k):
    count = 0
    n = len(intervals)
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            left = max(intervals[i][0] for i in combo)
            right = min(intervals[i][1] for i in combo)
            if right - left >= k:
                count += 1
    return count


@pytest.mark.criterion("oracle equivalence: interval-subset counting vs enumeration (N <= 10)")
def test_interval_intersection_matches_enumeration():
    env = load_seed("interval_intersection")
    for seed in range(10):
        for difficulty in (1, 2, 3, 6):  # N = 5..10
            latent, reference = env.generate(seed, difficulty)
            intervals = [tuple(iv) for iv in latent["intervals"]]
            assert reference == brute_wide_subsets(intervals, latent["k"]), latent


# ---------------------------------------------------------------------------
# Bridge: remove-each-edge connectivity brute force, N <= 10.
# ---------------------------------------------------------------------------

def reachable(n, edges, start=0):
    adjacency = {i: [] for i in range(n)}
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for neighbor in adjacency[node]:
            if neighbor not in seen:
                seen.add(neighbor)
                frontier.append(neighbor)
    return seen


def brute_bridges(n, edges):
    bridges = []
    components_before = sum(
        1 for node in range(n) if node == min(reachable(n, edges, node))
    )
    for index, edge in enumerate(edges):
        remaining = edges[:index] + edges[index + 1:]
        components_after = sum(
            1 for node in range(n) if node == min(reachable(n, remaining, node))
        )
        if components_after > components_before:
            bridges.append(sorted(edge))
    return sorted(bridges)


@pytest.mark.criterion("oracle equivalence: bridge set vs edge-removal brute force (N <= 10)")
def test_bridges_match_removal_brute_force():
    import random as stdlib_random

    find_bridges = namespace("bridge")["find_bridges"]
    env = load_seed("bridge")
    for seed in range(8):
        for difficulty in (1, 2):  # N = 7, 9
            latent, reference = env.generate(seed, difficulty)
            edges = [tuple(e) for e in latent["edges"]]
            assert reference == brute_bridges(latent["n"], edges)
            assert reference, "construction must plant at least one bridge"
            assert any(latent["n"] - 1 in e for e in reference)

    rng = stdlib_random.Random(11)
    for _ in range(30):
        n = rng.randint(2, 10)
        possible = [(u, v) for u in range(n) for v in range(u + 1, n)]
        edges = [e for e in possible if rng.random() < 0.4]
        assert find_bridges(n, edges) == brute_bridges(n, edges), (n, edges)


# ---------------------------------------------------------------------------
# EuclidGame: memoized full game-tree search, max(X, Y) <= 50.
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def minimax_wins(a, b):
    a, b = max(a, b), min(a, b)
    for k in range(1, a // b + 1):
        rest = a - k * b
        if rest == 0:
            return True
        if not minimax_wins(b, rest):
            return True
    return False


@pytest.mark.criterion("oracle equivalence: game winner vs exhaustive minimax (max 50)")
def test_euclid_game_matches_minimax():
    winner = namespace("euclid_game")["first_player_wins"]
    for x in range(1, 51):
        for y in range(1, x + 1):
            assert winner(x, y) == minimax_wins(x, y), (x, y)

    env = load_seed("euclid_game")
    for seed in range(20):
        latent, reference = env.generate(seed, 1)
        assert reference["winner"] == (1 if minimax_wins(latent["x"], latent["y"]) else 2)


# ---------------------------------------------------------------------------
# Fibonacci-style recurrence: naive iterative loop, N <= 10^4.
# ---------------------------------------------------------------------------

def naive_recurrence(s0, s1, p, q, n, modulus):
    if n == 0:
        return s0 % modulus
    prev, current = s0 % modulus, s1 % modulus
    for _ in range(n - 1):
        prev, current = current, (p * current + q * prev) % modulus
    return current


@pytest.mark.criterion("oracle equivalence: recurrence value vs naive loop (N <= 10^4)")
def test_fibonacci_matches_naive_loop():
    import random as stdlib_random

    fast = namespace("fibonacci")["linear_recurrence_mod"]
    rng = stdlib_random.Random(23)
    cases = [(1, 1, 1, 1, 0, 97), (1, 1, 1, 1, 1, 97), (2, 3, 5, 7, 10, 1009)]
    for _ in range(30):
        cases.append((rng.randint(1, 9), rng.randint(1, 9), rng.randint(1, 9),
                      rng.randint(1, 9), rng.randint(0, 10_000), 100003))
    for s0, s1, p, q, n, modulus in cases:
        assert fast(s0, s1, p, q, n, modulus) == naive_recurrence(s0, s1, p, q, n, modulus)

    env = load_seed("fibonacci")
    for seed in range(10):
        for difficulty in (1, 3, 8):
            latent, reference = env.generate(seed, difficulty)
            assert reference == naive_recurrence(latent["s0"], latent["s1"], latent["p"],
                                                 latent["q"], latent["n"], latent["m"])


# ---------------------------------------------------------------------------
# RecursiveFunction: memoized definitional recursion, max(M, N) <= 6.
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def definitional_recursion(m, n):
    if m == 0:
        return n + 1
    if n == 0:
        return definitional_recursion(m - 1, 1)
    return definitional_recursion(m - 1, definitional_recursion(m, n - 1))


@pytest.mark.criterion("oracle equivalence: nested recurrence vs memoized recursion (max 6)")
def test_recursive_function_matches_definitional_recursion():
    closed = namespace("recursive_function")["nested_recurrence"]
    for m in range(4):
        for n in range(7):
            assert closed(m, n) == definitional_recursion(m, n), (m, n)

    env = load_seed("recursive_function")
    for seed in range(20):
        for difficulty in (1, 2, 3):
            latent, reference = env.generate(seed, difficulty)
            assert reference == definitional_recursion(latent["m"], latent["n"])


# ---------------------------------------------------------------------------
# Partial-credit scorers stay inside [0, 1] and hit 1.0 on the reference.
# ---------------------------------------------------------------------------

def test_partial_credit_scorers_bounded_and_exact_on_reference():
    for name in ("knapsack", "bridge"):
        env = load_seed(name)
        for seed in range(6):
            latent, reference = env.generate(seed, 2)
            correct = env.process(env.render_answer(reference))
            value = env.score(correct, latent, reference)
            assert value == 1.0, name
