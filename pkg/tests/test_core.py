import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mixedgm.core import (
    Dataset,
    DomainError,
    EdgeMatrix,
    NodeType,
    conditional_loglik,
    conditional_loglik_gradient,
    log_partition,
    log_partition_derivs,
    natural_parameter,
)

from .conftest import ALL_TYPES, make_model, random_dataset
from .oracles import central_diff, grad_central_diff

ETA_GRIDS = {
    NodeType.GAUSSIAN: np.linspace(-5, 5, 200),
    NodeType.BERNOULLI: np.linspace(-5, 5, 200),
    NodeType.POISSON: np.linspace(-3, 3, 200),
    NodeType.EXPONENTIAL: np.linspace(-6, -0.1, 200),
}


class TestLogPartition:
    def test_known_values(self):
        assert log_partition(NodeType.GAUSSIAN, 0.0) == pytest.approx(math.log(2 * math.pi) / 2)
        assert log_partition(NodeType.BERNOULLI, 0.0) == pytest.approx(math.log(2))
        assert log_partition(NodeType.POISSON, 0.0) == pytest.approx(1.0)
        assert log_partition(NodeType.EXPONENTIAL, -1.0) == pytest.approx(0.0)

    def test_exponential_domain(self):
        with pytest.raises(DomainError):
            log_partition(NodeType.EXPONENTIAL, 0.0)
        with pytest.raises(DomainError):
            log_partition_derivs(NodeType.EXPONENTIAL, 0.5)

    def test_deriv_values(self):
        assert log_partition_derivs(NodeType.GAUSSIAN, 3.5) == pytest.approx((3.5, 1.0, 0.0))
        assert log_partition_derivs(NodeType.BERNOULLI, 0.0) == pytest.approx((0.0, 1.0, 0.0))
        assert log_partition_derivs(NodeType.EXPONENTIAL, -2.0) == pytest.approx((0.5, 0.25, 0.25))

    @pytest.mark.parametrize("node_type", ALL_TYPES, ids=lambda t: t.name)
    def test_derivs_match_finite_differences(self, node_type):
        for eta in ETA_GRIDS[node_type]:
            d1, d2, d3 = log_partition_derivs(node_type, eta)
            fd1 = central_diff(lambda e: log_partition(node_type, e), eta)
            fd2 = central_diff(lambda e: log_partition_derivs(node_type, e)[0], eta)
            fd3 = central_diff(lambda e: log_partition_derivs(node_type, e)[1], eta)
            for exact, fd in ((d1, fd1), (d2, fd2), (d3, fd3)):
                assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1e-9)

    @pytest.mark.parametrize("node_type", ALL_TYPES, ids=lambda t: t.name)
    def test_convexity(self, node_type):
        _, d2, _ = log_partition_derivs(node_type, ETA_GRIDS[node_type])
        assert np.all(d2 >= 0)

    def test_bernoulli_bounds(self):
        eta = np.linspace(-30, 30, 2001)
        _, d2, d3 = log_partition_derivs(NodeType.BERNOULLI, eta)
        assert np.all(np.abs(d2) <= 1.0)
        assert np.all(np.abs(d3) <= 2.0)


class TestNaturalParameter:
    def test_isolated_node(self):
        model = make_model([NodeType.BERNOULLI] * 3, np.zeros((3, 3)), alpha1=[0.7, 0, 0])
        assert natural_parameter(model, 0, [1.0, -1.0]) == pytest.approx(0.7)

    def test_single_edge(self):
        model = make_model(
            [NodeType.BERNOULLI, NodeType.BERNOULLI], [[0, 0.3], [0.3, 0]], alpha1=[0, 0]
        )
        assert natural_parameter(model, 0, [-1.0]) == pytest.approx(-0.3)

    def test_three_nodes(self):
        theta = np.array([[0, 0.3, -0.2], [0.3, 0, 0], [-0.2, 0, 0]])
        model = make_model([NodeType.GAUSSIAN] * 3, theta, alpha1=[0.1, 0, 0])
        # x_-0 = (2, 1): 0.1 + 0.3*2 - 0.2*1
        assert natural_parameter(model, 0, [2.0, 1.0]) == pytest.approx(0.5)

    def test_index_out_of_range(self):
        model = make_model([NodeType.BERNOULLI] * 2, np.zeros((2, 2)))
        with pytest.raises(IndexError):
            natural_parameter(model, 5, [1.0])


class TestConditionalLoglik:
    def test_bernoulli_flat(self, rng):
        data = random_dataset(rng, 12, [NodeType.BERNOULLI] * 3)
        val = conditional_loglik(NodeType.BERNOULLI, np.zeros(2), 0.0, data, 0)
        assert val == pytest.approx(-math.log(2))

    def test_gaussian_single_observation(self):
        data = Dataset(x=np.array([[0.0, 1.0]]), types=(NodeType.GAUSSIAN, NodeType.BERNOULLI))
        val = conditional_loglik(NodeType.GAUSSIAN, np.zeros(1), 0.0, data, 0, alpha2=-1.0)
        assert val == pytest.approx(-math.log(2 * math.pi) / 2)

    def test_poisson_single_observation(self):
        data = Dataset(x=np.array([[2.0, 1.0]]), types=(NodeType.POISSON, NodeType.BERNOULLI))
        val = conditional_loglik(NodeType.POISSON, np.zeros(1), 0.0, data, 0)
        assert val == pytest.approx(-math.log(2) - 1.0)

    def test_exponential_infeasible_raises(self):
        data = Dataset(x=np.array([[1.0, 1.0]]), types=(NodeType.EXPONENTIAL, NodeType.BERNOULLI))
        with pytest.raises(DomainError):
            conditional_loglik(NodeType.EXPONENTIAL, np.zeros(1), 0.5, data, 0)


class TestGradient:
    def test_saturated_model_zero_gradient(self):
        # Gaussian with theta=0, alpha1 = y for a constant column: D'(eta)=y exactly
        x = np.array([[1.3, 1.0], [1.3, -1.0], [1.3, 1.0]])
        data = Dataset(x=x, types=(NodeType.GAUSSIAN, NodeType.BERNOULLI))
        g = conditional_loglik_gradient(NodeType.GAUSSIAN, np.zeros(1), 1.3, data, 0)
        assert_allclose(g, 0.0, atol=1e-14)

    def test_gaussian_cross_moment(self, rng):
        data = random_dataset(rng, 30, [NodeType.GAUSSIAN, NodeType.GAUSSIAN, NodeType.BERNOULLI])
        g = conditional_loglik_gradient(NodeType.GAUSSIAN, np.zeros(2), 0.0, data, 0)
        x0 = np.delete(data.x, 0, axis=1)
        y = data.x[:, 0]
        assert_allclose(g[:2], x0.T @ y / data.n)
        assert g[2] == pytest.approx(y.mean())

    def test_matches_finite_differences(self, rng):
        for trial in range(100):
            p = int(rng.integers(2, 6))
            n = int(rng.integers(2, 11))
            types = [ALL_TYPES[i] for i in rng.integers(0, 4, p)]
            data = random_dataset(rng, n, types)
            s = int(rng.integers(0, p))
            ty = types[s]
            theta = rng.normal(0.0, 0.05, p - 1)
            alpha1 = -2.0 if ty is NodeType.EXPONENTIAL else float(rng.normal(0, 0.3))
            if ty is NodeType.EXPONENTIAL:
                theta = np.abs(theta) * -1.0  # keep eta < 0 for positive regressors

            def negll(params):
                return conditional_loglik(ty, params[:-1], params[-1], data, s)

            grad = conditional_loglik_gradient(ty, theta, alpha1, data, s)
            fd = grad_central_diff(negll, np.append(theta, alpha1))
            denom = np.maximum(np.abs(grad), 1e-8)
            assert np.all(np.abs(fd - grad) / denom <= 1e-6), f"trial {trial}"


class TestContainers:
    def test_edge_matrix_validation(self):
        with pytest.raises(ValueError):
            EdgeMatrix(np.array([[0.0, 1.0], [0.5, 0.0]]))  # asymmetric
        with pytest.raises(ValueError):
            EdgeMatrix(np.array([[0.1, 0.0], [0.0, 0.0]]))  # nonzero diagonal

    def test_dataset_support_validation(self):
        with pytest.raises(DomainError):
            Dataset(x=np.array([[0.5]]), types=(NodeType.BERNOULLI,))
        with pytest.raises(DomainError):
            Dataset(x=np.array([[2.5]]), types=(NodeType.POISSON,))
        with pytest.raises(DomainError):
            Dataset(x=np.array([[-1.0]]), types=(NodeType.EXPONENTIAL,))

    def test_non_gaussian_alpha2_rejected(self):
        with pytest.raises(ValueError):
            make_model([NodeType.POISSON], np.zeros((1, 1)), alpha2=[-1.0])
