import math

import numpy as np
import pytest

from mixedgm.combine import (
    BoundEstimates,
    EdgeSet,
    combine_and,
    combine_or,
    combine_with_selection_rules,
    estimate_bounds,
    preferred_node,
    select_edge_estimate,
    true_bounds,
)
from mixedgm.core import NodeType
from mixedgm.fit import NeighborhoodFit

from .conftest import make_model

G, B, P, E = NodeType.GAUSSIAN, NodeType.BERNOULLI, NodeType.POISSON, NodeType.EXPONENTIAL


def fits_from_thetas(thetas: dict[int, np.ndarray], p: int) -> dict[int, NeighborhoodFit]:
    return {
        s: NeighborhoodFit(
            s=s, theta_hat=np.asarray(thetas.get(s, np.zeros(p - 1)), dtype=float),
            alpha1_hat=0.0, lam=0.1, objective=0.0, iterations=1, converged=True,
        )
        for s in range(p)
    }


def random_neighborhoods(rng, p: int, density: float = 0.3) -> list[frozenset[int]]:
    out = []
    for s in range(p):
        members = {int(t) for t in range(p) if t != s and rng.random() < density}
        out.append(frozenset(members))
    return out


class TestEdgeSet:
    def test_canonicalization_and_validation(self):
        es = EdgeSet.from_pairs(4, [(3, 1), (1, 3), (0, 2)])
        assert es.sorted_edges == [(0, 2), (1, 3)]
        with pytest.raises(ValueError):
            EdgeSet.from_pairs(3, [(1, 1)])
        with pytest.raises(ValueError):
            EdgeSet.from_pairs(3, [(0, 5)])

    def test_from_theta_support(self):
        theta = np.zeros((3, 3))
        theta[0, 2] = theta[2, 0] = 0.4
        assert EdgeSet.from_theta(theta).sorted_edges == [(0, 2)]


class TestAndOr:
    def test_one_sided_membership(self):
        nbhd = [frozenset({1}), frozenset(), frozenset()]
        assert len(combine_and(nbhd)) == 0
        assert combine_or(nbhd).sorted_edges == [(0, 1)]

    def test_mutual_membership(self):
        nbhd = [frozenset({1}), frozenset({0}), frozenset()]
        assert combine_and(nbhd).sorted_edges == [(0, 1)]

    def test_against_double_loop_oracle(self, rng):
        for _ in range(50):
            p = int(rng.integers(3, 9))
            nbhd = random_neighborhoods(rng, p)
            expected_and = {
                (s, t)
                for s in range(p)
                for t in range(s + 1, p)
                if t in nbhd[s] and s in nbhd[t]
            }
            expected_or = {
                (s, t)
                for s in range(p)
                for t in range(s + 1, p)
                if t in nbhd[s] or s in nbhd[t]
            }
            assert combine_and(nbhd).edges == expected_and
            assert combine_or(nbhd).edges == expected_or

    def test_and_subset_of_or(self, rng):
        for _ in range(100):
            p = int(rng.integers(3, 10))
            nbhd = random_neighborhoods(rng, p)
            assert combine_and(nbhd).edges <= combine_or(nbhd).edges


class TestBoundEstimates:
    def test_poisson_no_bernoulli_neighbours(self):
        types = (P, G)
        fits = fits_from_thetas({0: np.array([0.9])}, 2)
        bounds = estimate_bounds(fits, types)
        assert bounds.poisson[0] == pytest.approx(1.0)

    def test_poisson_with_mass(self):
        types = (P, B, B)
        fits = {
            0: NeighborhoodFit(0, np.array([0.6, -0.4]), -3.0, 0.1, 0.0, 1, True),
            1: NeighborhoodFit(1, np.zeros(2), 0.0, 0.1, 0.0, 1, True),
            2: NeighborhoodFit(2, np.zeros(2), 0.0, 0.1, 0.0, 1, True),
        }
        bounds = estimate_bounds(fits, types)
        assert bounds.poisson[0] == pytest.approx(math.exp(-2.0))
        assert bounds.poisson[0] == pytest.approx(0.1353, abs=1e-4)

    def test_exponential_margin(self):
        types = (E, B, G)
        fits = {
            0: NeighborhoodFit(0, np.array([0.5, 1.0]), -2.0, 0.1, 0.0, 1, True),
            1: NeighborhoodFit(1, np.zeros(2), 0.0, 0.1, 0.0, 1, True),
            2: NeighborhoodFit(2, np.zeros(2), 0.0, 0.1, 0.0, 1, True),
        }
        bounds = estimate_bounds(fits, types)
        assert bounds.exponential[0] == pytest.approx(1.5)

    def test_true_bounds_from_model(self):
        theta = np.zeros((3, 3))
        theta[0, 1] = theta[1, 0] = -0.7
        model = make_model((P, B, E), theta, alpha1=[-1.0, 0.0, -2.0])
        bounds = true_bounds(model)
        assert bounds.poisson[0] == pytest.approx(math.exp(-1.0 + 0.7))
        assert bounds.exponential[2] == pytest.approx(2.0)


class TestSelectionRules:
    def test_gaussian_preference(self):
        types = (G, B)
        nbhd = [frozenset({1}), frozenset()]
        bounds = BoundEstimates()
        assert preferred_node(0, 1, types, bounds) == 0
        assert select_edge_estimate(0, 1, types, bounds, nbhd)
        nbhd = [frozenset(), frozenset({0})]  # only the Bernoulli side selects
        assert not select_edge_estimate(0, 1, types, bounds, nbhd)

    def test_poisson_bernoulli_thresholds(self):
        types = (P, B)
        nbhd = [frozenset({1}), frozenset()]
        assert preferred_node(0, 1, types, BoundEstimates(poisson={0: 0.5})) == 0
        assert preferred_node(0, 1, types, BoundEstimates(poisson={0: 2.5})) == 1
        # undecided band and exact boundaries fall back
        for b_p in (1.0, 1.5, 2.0):
            assert preferred_node(0, 1, types, BoundEstimates(poisson={0: b_p})) is None
        assert select_edge_estimate(0, 1, types, BoundEstimates(poisson={0: 1.5}), nbhd, "or")
        assert not select_edge_estimate(0, 1, types, BoundEstimates(poisson={0: 1.5}), nbhd, "and")

    def test_poisson_exponential_thresholds(self):
        types = (P, E)
        choose_p = BoundEstimates(poisson={0: 0.5}, exponential={1: 0.9})  # 0.405<1, 0.36<2
        assert preferred_node(0, 1, types, choose_p) == 0
        choose_e = BoundEstimates(poisson={0: 1.2}, exponential={1: 1.5})  # 2.7>1, 4.05>2
        assert preferred_node(0, 1, types, choose_e) == 1
        conflicted = BoundEstimates(poisson={0: 1.9}, exponential={1: 0.95})  # 1.71>1, 1.63<2
        assert preferred_node(0, 1, types, conflicted) is None

    def test_exponential_bernoulli_always_decided(self):
        types = (E, B)
        assert preferred_node(0, 1, types, BoundEstimates(exponential={0: 1.0})) == 0
        assert preferred_node(0, 1, types, BoundEstimates(exponential={0: 0.99})) == 1
        assert preferred_node(0, 1, types, BoundEstimates(exponential={0: -0.5})) == 1

    def test_symmetry_in_argument_order(self, rng):
        types = (P, B, E, G)
        bounds = BoundEstimates(poisson={0: 0.5}, exponential={2: 1.2})
        for s in range(4):
            for t in range(4):
                if s == t:
                    continue
                assert preferred_node(s, t, types, bounds) == preferred_node(t, s, types, bounds)

    def test_same_type_uses_fallback(self):
        types = (B, B)
        nbhd = [frozenset({1}), frozenset()]
        assert preferred_node(0, 1, types, BoundEstimates()) is None
        assert select_edge_estimate(0, 1, types, BoundEstimates(), nbhd, "or")
        assert not select_edge_estimate(0, 1, types, BoundEstimates(), nbhd, "and")


class TestCombineWithRules:
    def test_same_type_graph_equals_fallback(self, rng):
        p = 6
        thetas = {s: rng.normal(0, 0.5, p - 1) * (rng.random(p - 1) < 0.4) for s in range(p)}
        fits = fits_from_thetas(thetas, p)
        types = (B,) * p
        nbhd = [frozenset(np.flatnonzero(np.insert(thetas[s], s, 0.0))) for s in range(p)]
        assert combine_with_selection_rules(fits, types, "or").edges == combine_or(nbhd).edges
        assert combine_with_selection_rules(fits, types, "and").edges == combine_and(nbhd).edges

    def test_gb_cross_edges_from_gaussian_side_only(self, rng):
        types = (G, G, B, B)
        thetas = {
            0: np.array([0.0, 0.5, 0.0]),   # node 0 selects node 2
            1: np.array([0.0, 0.0, 0.0]),
            2: np.array([0.0, 0.9, 0.0]),   # node 2 selects node 1 (ignored for cross)
            3: np.array([0.0, 0.0, 0.0]),
        }
        fits = fits_from_thetas(thetas, 4)
        est = combine_with_selection_rules(fits, types, "or")
        assert (0, 2) in est
        assert (1, 2) not in est  # only the Bernoulli side selected it

    def test_undecided_bounds_reduce_to_fallback(self, rng):
        types = (P, B, P, B)
        thetas = {s: rng.normal(0, 0.4, 3) * (rng.random(3) < 0.5) for s in range(4)}
        fits = fits_from_thetas(thetas, 4)
        undecided = BoundEstimates(poisson={0: 1.5, 2: 1.5})
        nbhd = [frozenset(np.flatnonzero(np.insert(thetas[s], s, 0.0))) for s in range(4)]
        for fallback, reference in (("or", combine_or(nbhd)), ("and", combine_and(nbhd))):
            got = combine_with_selection_rules(fits, types, fallback, bounds=undecided)
            assert got.edges == reference.edges

    def test_sandwich_between_and_and_or(self, rng):
        for trial in range(50):
            p = 6
            types = (P, E, B, P, E, B)
            thetas = {s: rng.normal(0, 0.4, p - 1) * (rng.random(p - 1) < 0.5) for s in range(p)}
            fits = fits_from_thetas(thetas, p)
            bounds = BoundEstimates(
                poisson={0: float(rng.uniform(0, 3)), 3: float(rng.uniform(0, 3))},
                exponential={1: float(rng.uniform(-1, 2)), 4: float(rng.uniform(-1, 2))},
            )
            nbhd = [frozenset(np.flatnonzero(np.insert(thetas[s], s, 0.0))) for s in range(p)]
            est = combine_with_selection_rules(fits, types, "or", bounds=bounds)
            assert combine_and(nbhd).edges <= est.edges <= combine_or(nbhd).edges
