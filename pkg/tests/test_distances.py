"""Attribute distances against independent oracles.

The Gaussian divergence oracle integrates E_p[log p - log q] with
tensor Gauss-Hermite quadrature over scipy's logpdf evaluations. The
integrand is quadratic in x, so a handful of nodes per dimension is
exact to machine precision and fully independent of the closed form.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from numpy.polynomial.hermite_e import hermegauss
from scipy.stats import multivariate_normal

from graphsem import (
    AttributeId,
    Corpus,
    Edge,
    GaussianParams,
    GraphPattern,
    Vertex,
    brute_force_match,
    compute_scales,
    edge_cost_vector,
    gaussian_divergence,
    normalize,
    scalar_distance,
    unit_weights,
    vertex_cost_vector,
)

from conftest import gaussian_params_st, random_graph


def kl_quadrature(p: GaussianParams, q: GaussianParams, nodes: int = 10) -> float:
    """Numerical-integration KL oracle: E_p[log p(x) - log q(x)]."""
    d = p.dimension
    z_nodes, z_weights = hermegauss(nodes)
    grids = np.meshgrid(*([z_nodes] * d), indexing="ij")
    z = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([z_weights] * d), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    chol = np.linalg.cholesky(p.covariance)
    x = p.mean + z @ chol.T
    log_p = multivariate_normal(p.mean, p.covariance).logpdf(x)
    log_q = multivariate_normal(q.mean, q.covariance).logpdf(x)
    return float(np.sum(w * (log_p - log_q)) / (2.0 * np.pi) ** (d / 2.0))


def jeffreys_oracle(p: GaussianParams, q: GaussianParams) -> float:
    return kl_quadrature(p, q) + kl_quadrature(q, p)


def random_spd_gaussian(rng: np.random.Generator, d: int) -> GaussianParams:
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    eigenvalues = rng.uniform(0.5, 2.0, d)
    cov = q @ np.diag(eigenvalues) @ q.T
    cov = (cov + cov.T) / 2.0
    return GaussianParams(mean=rng.normal(0.0, 1.0, d), covariance=cov)


class TestScalarDistance:
    def test_identity(self):
        assert scalar_distance(3.0, 3.0) == 0.0

    def test_absolute_difference(self):
        assert scalar_distance(1.0, 4.5) == 3.5

    def test_symmetry_pair(self):
        assert scalar_distance(-2.0, 2.0) == 4.0
        assert scalar_distance(2.0, -2.0) == 4.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            scalar_distance(float("nan"), 0.0)
        with pytest.raises(ValueError):
            scalar_distance(0.0, float("inf"))


class TestGaussianDivergence:
    def test_identical_distributions_exact_zero(self):
        p = GaussianParams(mean=np.zeros(2), covariance=np.eye(2))
        assert gaussian_divergence(p, p) == 0.0

    def test_unit_variance_mean_shift(self):
        # scalar case: KL each way is (mu1-mu0)^2/2, so J = (mu1-mu0)^2
        p = GaussianParams(mean=np.zeros(1), covariance=np.eye(1))
        q = GaussianParams(mean=np.ones(1), covariance=np.eye(1))
        value = gaussian_divergence(p, q)
        assert value == pytest.approx(1.0, abs=1e-12)
        assert value == pytest.approx(jeffreys_oracle(p, q), rel=1e-9)

    def test_variance_change(self):
        # log-variance terms cancel in the symmetrized sum:
        # J = (1/4 - 1)/2 + (4 - 1)/2 = 1.125
        p = GaussianParams(mean=np.zeros(1), covariance=np.eye(1))
        q = GaussianParams(mean=np.zeros(1), covariance=4.0 * np.eye(1))
        value = gaussian_divergence(p, q)
        assert value == pytest.approx(1.125, abs=1e-12)
        assert value == pytest.approx(jeffreys_oracle(p, q), rel=1e-9)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_quadrature_oracle_agreement(self, d):
        rng = np.random.default_rng(90 + d)
        for _ in range(20):
            p = random_spd_gaussian(rng, d)
            q = random_spd_gaussian(rng, d)
            value = gaussian_divergence(p, q)
            oracle = jeffreys_oracle(p, q)
            assert value == pytest.approx(oracle, rel=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(p=gaussian_params_st(2), q=gaussian_params_st(2))
    def test_symmetry_and_nonnegativity(self, p, q):
        forward = gaussian_divergence(p, q)
        backward = gaussian_divergence(q, p)
        assert forward == backward
        assert forward >= 0.0

    def test_dimension_mismatch(self):
        p = GaussianParams(mean=np.zeros(1), covariance=np.eye(1))
        q = GaussianParams(mean=np.zeros(2), covariance=np.eye(2))
        with pytest.raises(ValueError):
            gaussian_divergence(p, q)

    def test_singular_covariance_is_numeric_error(self):
        p = GaussianParams(mean=np.zeros(2), covariance=np.eye(2))
        singular = GaussianParams(mean=np.zeros(2),
                                  covariance=np.array([[1.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(np.linalg.LinAlgError):
            gaussian_divergence(p, singular)


def _vertex(vid, t=0, pw=0.5, mean=(0.0, 0.0), div=0.1):
    return Vertex(id=vid, time_index=t, pixel_weight=pw,
                  gaussian=GaussianParams(np.asarray(mean), np.eye(len(mean))),
                  divergence=div)


class TestCostVectors:
    def test_vertex_identity(self):
        v = _vertex("v")
        assert np.array_equal(vertex_cost_vector(v, v), np.zeros(7))

    def test_vertex_single_attribute_difference(self):
        v1 = _vertex("a", pw=0.3)
        v2 = _vertex("b", pw=0.5)
        costs = vertex_cost_vector(v1, v2)
        assert costs[AttributeId.PIXEL_WEIGHT] == pytest.approx(0.2)
        mask = np.ones(7, dtype=bool)
        mask[AttributeId.PIXEL_WEIGHT] = False
        assert np.array_equal(costs[mask], np.zeros(6))

    def test_vertex_componentwise_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            v1 = _vertex("a", pw=rng.uniform(), mean=rng.normal(size=2),
                         div=rng.uniform())
            v2 = _vertex("b", pw=rng.uniform(), mean=rng.normal(size=2),
                         div=rng.uniform())
            costs = vertex_cost_vector(v1, v2)
            assert costs[AttributeId.PIXEL_WEIGHT] == scalar_distance(
                v1.pixel_weight, v2.pixel_weight)
            assert costs[AttributeId.GAUSSIAN] == gaussian_divergence(
                v1.gaussian, v2.gaussian)
            assert costs[AttributeId.DIVERGENCE] == scalar_distance(
                v1.divergence, v2.divergence)

    def test_edge_identity(self):
        e = Edge("a", "b", 1.0, 0.2, 0.3, 0.4)
        assert np.array_equal(edge_cost_vector(e, e), np.zeros(7))

    def test_edge_single_attribute(self):
        e1 = Edge("a", "b", 1.0, 0.2, 0.3, 0.4)
        e2 = Edge("a", "b", 1.0, 0.2, 0.3, 1.1)
        costs = edge_cost_vector(e1, e2)
        assert costs[AttributeId.MUTUAL_INFORMATION] == pytest.approx(0.7)
        assert costs.sum() == pytest.approx(0.7)

    def test_edge_componentwise_oracle(self):
        rng = np.random.default_rng(5)
        e1 = Edge("a", "b", rng.uniform(0.1, 2), rng.uniform(), rng.uniform(), rng.uniform())
        e2 = Edge("a", "b", rng.uniform(0.1, 2), rng.uniform(), rng.uniform(), rng.uniform())
        costs = edge_cost_vector(e1, e2)
        assert costs[AttributeId.TIME_DELAY] == scalar_distance(e1.time_delay, e2.time_delay)
        assert costs[AttributeId.PIXEL_FLOW] == scalar_distance(e1.pixel_flow, e2.pixel_flow)
        assert costs[AttributeId.GAUSSIAN_EVOLUTION] == scalar_distance(
            e1.gaussian_evolution, e2.gaussian_evolution)
        assert costs[AttributeId.MUTUAL_INFORMATION] == scalar_distance(
            e1.mutual_information, e2.mutual_information)


class TestScales:
    def test_reference_only_corpus_floors_to_one(self):
        g = GraphPattern(id="g", vertices=(_vertex("v"),), edges=())
        corpus = Corpus(feature_dimension=2, graphs={"g": g})
        assert np.array_equal(compute_scales(corpus, g), np.ones(7))

    def test_two_graph_pixel_weight_scale(self):
        ref = GraphPattern(id="ref", vertices=(_vertex("v", pw=0.1),), edges=())
        other = GraphPattern(id="other", vertices=(_vertex("v", pw=0.5),), edges=())
        corpus = Corpus(feature_dimension=2, graphs={"ref": ref, "other": other})
        scales = compute_scales(corpus, ref)
        assert scales[AttributeId.PIXEL_WEIGHT] == pytest.approx(0.4)
        # every attribute with zero observed range floors to 1
        mask = np.ones(7, dtype=bool)
        mask[AttributeId.PIXEL_WEIGHT] = False
        assert np.array_equal(scales[mask], np.ones(6))

    def test_matches_brute_force_maxima(self):
        rng = np.random.default_rng(17)
        graphs = {}
        for k in range(5):
            g = random_graph(rng, f"g{k}", d=2, max_layers=2, max_width=2)
            graphs[g.id] = g
        corpus = Corpus(feature_dimension=2, graphs=graphs)
        reference = graphs["g0"]
        expected = np.zeros(7)
        for g in graphs.values():
            result = brute_force_match(reference, g, unit_weights(), np.ones(7))
            expected = np.maximum(expected, result.per_attribute)
        expected[expected == 0.0] = 1.0
        assert np.allclose(compute_scales(corpus, reference), expected, atol=1e-12)


class TestNormalize:
    def test_zero_costs(self):
        assert np.array_equal(normalize(np.zeros(7), np.ones(7)), np.zeros(7))

    def test_boundary_equals_one(self):
        scales = np.full(7, 2.0)
        assert np.array_equal(normalize(scales.copy(), scales), np.ones(7))

    def test_clamped_above_scale(self):
        scales = np.full(7, 2.0)
        assert np.array_equal(normalize(scales * 2.0, scales), np.ones(7))

    def test_rejects_bad_scales(self):
        with pytest.raises(ValueError):
            normalize(np.zeros(7), np.zeros(7))
