import math
import random
from itertools import combinations

import pytest

from navsim.landmarks import (
    HashScorer,
    InstanceTooLargeError,
    ObjectiveWeights,
    Selection,
    TableScorer,
    objective,
    select_exact,
    select_greedy,
)
from navsim.routegen import Route


def line_route(distances):
    """Route over synthetic along-route distances; node i sits at distances[i]."""
    n = len(distances)
    return Route(tuple(range(n)), distances[-1], (0, n - 1), tuple(distances))


def random_line_route(rng, n_nodes):
    gaps = [rng.uniform(20, 200) for _ in range(n_nodes - 1)]
    dist = [0.0]
    for g in gaps:
        dist.append(dist[-1] + g)
    return line_route(dist)


def oracle_objective(route, selected, weights, scorer, intersections):
    """Independent recomputation of the three objective terms."""
    at = dict(zip(route.node_ids, route.cum_dists))
    stops = [0.0] + sorted(at[n] for n in selected) + [route.total_length]
    f1 = min(stops[i + 1] - stops[i] for i in range(len(stops) - 1))
    f2s, f3s = [], []
    for n in selected:
        ahead = [at[m] - at[n] for m in route.node_ids
                 if m in intersections and at[m] >= at[n]]
        d = min(ahead) if ahead else route.total_length - at[n]
        f2s.append(1.0 / (d + weights.sigma))
        f3s.append(scorer.score(n))
    f2 = sum(f2s) / len(f2s) if f2s else 0.0
    f3 = sum(f3s) / len(f3s) if f3s else 0.0
    return weights.w1 * f1 + weights.w2 * f2 + weights.w3 * f3


def oracle_enumerate(route, weights, scorer, intersections):
    """Second, independently written brute-force maximizer."""
    best, best_value = None, -math.inf
    for subset in combinations(sorted(route.interior()), weights.l):
        value = oracle_objective(route, subset, weights, scorer, intersections)
        if value > best_value:
            best, best_value = subset, value
    return best, best_value


class TestObjective:
    def test_single_midpoint_spread_term(self):
        route = line_route([0.0, 200.0, 400.0])
        weights = ObjectiveWeights(w1=1, w2=0, w3=0, l=1)
        value = objective(route, Selection((1,), 0.0), weights, HashScorer(), set())
        assert value == pytest.approx(200.0)

    def test_intersection_node_scores_one_over_sigma(self):
        route = line_route([0.0, 150.0, 400.0])
        weights = ObjectiveWeights(w1=0, w2=1, w3=0, sigma=15.0, l=1)
        value = objective(route, Selection((1,), 0.0), weights, HashScorer(), {1})
        assert value == pytest.approx(1.0 / 15.0)

    def test_matches_independent_recomputation(self):
        rng = random.Random(11)
        for _ in range(50):
            route = random_line_route(rng, rng.randint(6, 16))
            interior = list(route.interior())
            k = rng.randint(1, min(4, len(interior)))
            selected = tuple(sorted(rng.sample(interior, k)))
            intersections = set(rng.sample(list(route.node_ids), rng.randint(0, 4)))
            weights = ObjectiveWeights(w1=rng.uniform(0, 2), w2=rng.uniform(0, 2),
                                       w3=rng.uniform(0, 4), l=k)
            scorer = HashScorer(rng.randint(0, 99))
            got = objective(route, Selection(selected, 0.0), weights, scorer, intersections)
            want = oracle_objective(route, selected, weights, scorer, intersections)
            assert got == pytest.approx(want, rel=1e-12)

    def test_selection_off_route_rejected(self):
        route = line_route([0.0, 100.0, 200.0])
        weights = ObjectiveWeights(l=1)
        with pytest.raises(ValueError):
            objective(route, Selection((99,), 0.0), weights, HashScorer(), set())
        with pytest.raises(ValueError, match="interior"):
            objective(route, Selection((0,), 0.0), weights, HashScorer(), set())


class TestSelectGreedy:
    def test_exactly_l_candidates_selects_all(self):
        route = line_route([0.0, 100.0, 250.0, 300.0, 500.0])
        weights = ObjectiveWeights(l=3)
        picked = select_greedy(route, weights, HashScorer(), set())
        assert picked.node_ids == (1, 2, 3)

    def test_uniform_line_spreads_evenly(self):
        route = line_route([100.0 * i for i in range(13)])  # 1200 m, ideal gap 300
        weights = ObjectiveWeights(w1=1, w2=0, w3=0, l=3)
        picked = select_greedy(route, weights, HashScorer(), set())
        exact_best, _ = oracle_enumerate(route, weights, HashScorer(), set())
        at = dict(zip(route.node_ids, route.cum_dists))
        stops = [0.0] + sorted(at[n] for n in picked.node_ids) + [route.total_length]
        gaps = [b - a for a, b in zip(stops, stops[1:])]
        best_stops = [0.0] + sorted(at[n] for n in exact_best) + [route.total_length]
        best_min_gap = min(b - a for a, b in zip(best_stops, best_stops[1:]))
        assert min(gaps) >= best_min_gap - 100.0  # within one node of optimal spread

    def test_planted_scorer_picks_planted_nodes(self):
        route = line_route([50.0 * i for i in range(10)])
        planted = {2: 1.0, 5: 1.0, 7: 1.0}
        weights = ObjectiveWeights(w1=0, w2=0, w3=1, l=3)
        picked = select_greedy(route, weights, TableScorer(planted), set())
        assert picked.node_ids == (2, 5, 7)

    def test_deterministic(self):
        rng = random.Random(5)
        route = random_line_route(rng, 14)
        weights = ObjectiveWeights(l=3)
        a = select_greedy(route, weights, HashScorer(1), {3, 8})
        b = select_greedy(route, weights, HashScorer(1), {3, 8})
        assert a == b

    def test_too_few_candidates(self):
        route = line_route([0.0, 100.0, 200.0])
        with pytest.raises(ValueError):
            select_greedy(route, ObjectiveWeights(l=2), HashScorer(), set())


class TestSelectExact:
    def test_l_equals_candidates_unique_subset(self):
        route = line_route([0.0, 80.0, 160.0, 240.0])
        weights = ObjectiveWeights(l=2)
        picked = select_exact(route, weights, HashScorer(), set())
        assert picked.node_ids == (1, 2)

    def test_exact_at_least_greedy(self):
        rng = random.Random(21)
        for _ in range(20):
            route = random_line_route(rng, rng.randint(8, 14))
            weights = ObjectiveWeights(w3=rng.uniform(0, 5), l=3)
            scorer = HashScorer(rng.randint(0, 9))
            intersections = set(rng.sample(list(route.node_ids), 2))
            exact = select_exact(route, weights, scorer, intersections)
            greedy = select_greedy(route, weights, scorer, intersections)
            assert exact.objective_value >= greedy.objective_value - 1e-12

    def test_matches_independent_enumerator(self):
        rng = random.Random(33)
        for _ in range(25):
            route = random_line_route(rng, 14)  # 12 candidates
            weights = ObjectiveWeights(w1=rng.uniform(0, 2), w2=rng.uniform(0, 2),
                                       w3=rng.uniform(0, 4), l=3)
            scorer = HashScorer(rng.randint(0, 99))
            intersections = set(rng.sample(list(route.node_ids), 3))
            mine = select_exact(route, weights, scorer, intersections)
            best, best_value = oracle_enumerate(route, weights, scorer, intersections)
            assert mine.node_ids == best
            assert mine.objective_value == pytest.approx(best_value, rel=1e-12)

    def test_instance_too_large(self):
        route = line_route([10.0 * i for i in range(60)])
        with pytest.raises(InstanceTooLargeError):
            select_exact(route, ObjectiveWeights(l=6), HashScorer(), set())


class TestProperties:
    def test_exact_beats_random_subsets(self):
        rng = random.Random(8)
        route = random_line_route(rng, 15)
        weights = ObjectiveWeights(l=3)
        scorer = HashScorer(2)
        intersections = {4, 9}
        exact = select_exact(route, weights, scorer, intersections)
        interior = list(route.interior())
        for _ in range(1000):
            subset = tuple(sorted(rng.sample(interior, 3)))
            value = objective(route, Selection(subset, 0.0), weights, scorer, intersections)
            assert exact.objective_value >= value - 1e-12

    def test_weight_scaling_leaves_argmax_unchanged(self):
        rng = random.Random(13)
        for scale in (0.1, 3.7, 250.0):
            route = random_line_route(rng, 12)
            scorer = HashScorer(7)
            intersections = {3, 7}
            base = ObjectiveWeights(w1=1.0, w2=0.8, w3=2.5, l=3)
            scaled = ObjectiveWeights(w1=scale, w2=0.8 * scale, w3=2.5 * scale, l=3)
            assert select_exact(route, base, scorer, intersections).node_ids == \
                select_exact(route, scaled, scorer, intersections).node_ids
            assert select_greedy(route, base, scorer, intersections).node_ids == \
                select_greedy(route, scaled, scorer, intersections).node_ids

    def test_hash_scorer_range_and_determinism(self):
        scorer = HashScorer(4)
        values = [scorer.score(n) for n in range(200)]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert values == [HashScorer(4).score(n) for n in range(200)]
