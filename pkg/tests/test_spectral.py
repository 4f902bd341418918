import math

import numpy as np
import pytest

from agnosbm import (EigenEstimate, EstimationFailure, Regime, SbmParams,
                     basic_eigenvalue_approx, exact_spectrum,
                     improved_eigenvalue_approx, moment_determinants,
                     sample_sbm, split_edges, vandermonde_gamma)
from agnosbm.graphs import EdgeSubset, Graph
from agnosbm.spectral import (combine_probe_estimates, det_with_flag,
                              jacobi_eigh)

from conftest import cauchy_binet_det, rank_moments


class TestVandermondeGamma:
    def test_single_value_is_empty_product(self):
        assert vandermonde_gamma([3.7]) == 1.0
        assert vandermonde_gamma([]) == 1.0

    def test_two_values_expansion(self):
        l1, l2 = 5.0, 2.0
        assert vandermonde_gamma([l1, l2]) == pytest.approx(
            l1**2 + l2**2 - 2 * l1 * l2)

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_matches_subset_expansion(self, m):
        rng = np.random.default_rng(m)
        mus = np.sort(rng.uniform(1.0, 9.0, size=m))[::-1]
        a = rng.uniform(0.5, 2.0, size=m)
        # exactly m components: the expansion has a single subset, so the
        # determinant divided by the weights is the coefficient itself
        counts = rank_moments(a, mus, 2 * m)
        det = moment_determinants(counts, m)
        assert det / np.prod(a) == pytest.approx(vandermonde_gamma(mus), rel=1e-9)


class TestMomentDeterminants:
    def test_empty_and_scalar(self):
        assert moment_determinants([], 0) == 1.0
        assert moment_determinants([7.0], 1) == 7.0

    def test_two_by_two_formula(self):
        counts = [3.0, 5.0, 11.0]
        assert moment_determinants(counts, 2) == pytest.approx(3 * 11 - 25)

    def test_cauchy_binet_identity(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            h = int(rng.integers(1, 6))
            # well-separated components keep the identity verifiable at
            # 1e-9 in finite precision
            mus = np.sort(rng.uniform(-6.0, 9.0, size=h))
            while h > 1 and np.diff(mus).min() < 0.5:
                mus = np.sort(rng.uniform(-6.0, 9.0, size=h))
            a = rng.uniform(0.2, 3.0, size=h)
            start = int(rng.integers(0, 3))
            counts = rank_moments(a, mus, 2 * h + start + 2)
            for m in range(1, h + 1):
                expected = cauchy_binet_det(a, mus, m, start)
                got = moment_determinants(counts, m, start)
                assert got == pytest.approx(expected, rel=1e-9, abs=1e-12)
            beyond = moment_determinants(counts, h + 1, start)
            scale = np.abs(counts).max() ** (h + 1)
            assert abs(beyond) <= 1e-9 * scale

    def test_dominance_monotone(self):
        mus = np.array([8.0, 5.0, 3.0])
        a = np.array([1.0, 0.7, 0.4])
        counts = rank_moments(a, mus, 40)
        previous_gap = None
        for start in (2, 8, 14, 20, 26, 32):
            det = moment_determinants(counts, 2, start)
            dominant = a[0] * a[1] * (mus[0] * mus[1]) ** start * vandermonde_gamma(mus[:2])
            gap = abs(det / dominant - 1.0)
            if previous_gap is not None:
                assert gap <= previous_gap
            previous_gap = gap
        assert previous_gap < 1e-6

    def test_zero_flagging(self):
        counts = rank_moments([2.0], [3.0], 8)
        det, flagged = det_with_flag(counts, 2)
        assert flagged and det == 0.0
        det1, flagged1 = det_with_flag(counts, 1)
        assert not flagged1 and det1 == pytest.approx(2.0)


class TestExactSpectrum:
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_symmetric_eigenvalues(self, k):
        alpha, beta = 13.0, 4.0
        Q = np.full((k, k), beta)
        np.fill_diagonal(Q, alpha)
        params = SbmParams(p=np.full(k, 1.0 / k), Q=Q)
        spectrum = exact_spectrum(params)
        assert spectrum.h == 2
        assert spectrum.lambdas[0] == pytest.approx((alpha + (k - 1) * beta) / k,
                                                    abs=1e-10)
        assert spectrum.lambdas[1] == pytest.approx((alpha - beta) / k, abs=1e-10)

    def test_single_community(self):
        spectrum = exact_spectrum(SbmParams(p=[1.0], Q=[[7.5]]))
        assert spectrum.h == 1 and spectrum.h_prime == 1
        assert spectrum.lambdas[0] == pytest.approx(7.5)
        assert spectrum.zeta[0, 0, 0] == pytest.approx(1.0)

    def _random_params(self, rng, k):
        p = rng.uniform(0.2, 1.0, size=k)
        p /= p.sum()
        base = rng.uniform(1.0, 8.0, size=(k, k))
        Q = (base + base.T) / 2
        return SbmParams(p=p, Q=Q)

    def test_resolution_of_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            params = self._random_params(rng, 3)
            spectrum = exact_spectrum(params)
            for a in range(3):
                for b in range(3):
                    total = spectrum.zeta[:, a, b].sum()
                    expected = (1.0 / params.p[a]) if a == b else 0.0
                    assert total == pytest.approx(expected, abs=1e-9)

    def test_projector_orthogonality(self):
        rng = np.random.default_rng(13)
        params = self._random_params(rng, 4)
        spectrum = exact_spectrum(params)
        p_inv = np.diag(1.0 / params.p)
        for i in range(spectrum.h):
            for j in range(spectrum.h):
                if i == j:
                    continue
                for a in range(4):
                    for b in range(4):
                        value = spectrum.projectors[i][:, a] @ p_inv @ spectrum.projectors[j][:, b]
                        assert abs(value) < 1e-9

    def test_zeta_quadratic_form(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            params = self._random_params(rng, 3)
            spectrum = exact_spectrum(params)
            for a in range(3):
                assert np.all(spectrum.zeta[:, a, a] >= -1e-12)
                for b in range(3):
                    gaps = (spectrum.zeta[:, a, a] - 2 * spectrum.zeta[:, a, b]
                            + spectrum.zeta[:, b, b])
                    assert np.all(gaps >= -1e-9)
                    if a == b:
                        assert np.all(np.abs(gaps) < 1e-9)
                    else:
                        assert gaps.max() > 1e-9

    def test_rejects_nonpositive_prior(self):
        with pytest.raises(Exception):
            exact_spectrum(SbmParams(p=[0.5, 0.5], Q=[[1, 1], [1, 2]]).__class__(
                p=np.array([0.0, 1.0]), Q=np.array([[1.0, 1.0], [1.0, 2.0]])))


class TestJacobi:
    def test_matches_numpy_on_random_symmetric(self):
        rng = np.random.default_rng(3)
        for k in (2, 3, 5, 8):
            base = rng.normal(size=(k, k))
            S = (base + base.T) / 2
            w, V = jacobi_eigh(S)
            order = np.argsort(w)
            w_ref = np.sort(np.linalg.eigvalsh(S))
            assert np.allclose(np.sort(w), w_ref, atol=1e-9)
            recon = V @ np.diag(w) @ V.T
            assert np.allclose(recon, S, atol=1e-9)
            assert np.allclose(V.T @ V, np.eye(k), atol=1e-9)
            _ = order


class TestEstimators:
    def test_isolated_vertex_fails(self):
        residual = Graph(5, [[1, 2]])
        subset = EdgeSubset(5, np.empty((0, 2), dtype=np.int64), 1)
        with pytest.raises(EstimationFailure):
            basic_eigenvalue_approx(residual, subset, 0.1, 0)

    def test_small_component_fails(self):
        residual = Graph(200, [[0, 1]])
        subset = EdgeSubset(200, np.empty((0, 2), dtype=np.int64), 1)
        with pytest.raises(EstimationFailure):
            basic_eigenvalue_approx(residual, subset, 0.1, 0)

    def test_edgeless_graph_fails(self):
        g = Graph(10, np.empty((0, 2), dtype=np.int64))
        with pytest.raises(EstimationFailure):
            improved_eigenvalue_approx(g, 0.1, seed=0)

    def test_median_combination(self):
        runs = [
            EigenEstimate(h=2, values=[29.0, 19.0], lambda1_crude=30.0),
            EigenEstimate(h=2, values=[31.0, 21.0], lambda1_crude=31.0),
            EigenEstimate(h=1, values=[30.0], lambda1_crude=29.0),
        ]
        combined = combine_probe_estimates(runs)
        assert combined.h == 2
        assert combined.values == [30.0, 20.0]

    def test_improved_is_deterministic_across_threads(self, two_community_params):
        g, _ = sample_sbm(two_community_params, 3000, 5)
        first = improved_eigenvalue_approx(g, 0.1, seed=11, threads=1)
        second = improved_eigenvalue_approx(g, 0.1, seed=11, threads=4)
        assert first.to_json() == second.to_json()

    def test_json_round_trip(self):
        est = EigenEstimate(h=2, values=[3.0, -1.5], lambda1_crude=3.2,
                            flags=["instability:2"])
        assert EigenEstimate.from_json(est.to_json()) == est


@pytest.mark.slow
def test_estimator_recovers_rate_in_open_window():
    """Sparse single-community instance large enough for the depth window."""
    params = SbmParams(p=[1.0], Q=[[4.0]])
    g, _ = sample_sbm(params, 3_000_000, 1)
    est = improved_eigenvalue_approx(g, 0.1, seed=2, num_probes=6)
    assert est.h == 1
    assert est.values[0] == pytest.approx(4.0, rel=0.15)
