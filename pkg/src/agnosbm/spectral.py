"""Moment matrices of cross-counts and spectral estimation.

The estimators in this module work from the sequence of split-edge
cross-counts at consecutive BFS depths.  In expectation that sequence has
rank-``h`` structure ``N_l = sum_s a_s mu_s^l`` where the ``mu_s`` are the
distinct nonzero eigenvalues of ``diag(p) Q`` damped by the split, so
Hankel determinants of consecutive counts isolate products of eigenvalue
powers.  ``exact_spectrum`` provides the closed-form oracle used by tests.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EstimationFailure, ParameterError
from .graphs import (EdgeSubset, Graph, SbmParams, WorkBudgetExceeded,
                     cross_count_from_shells, neighborhood_shells)
from .rng import derived_rng

# Determinants below this multiple of the product of row norms are noise.
DET_ZERO_RTOL = 1e-12
_EIG_GROUP_RTOL = 1e-9


@dataclass
class EigenEstimate:
    """Estimated count and values of the distinct nonzero kernel eigenvalues.

    ``values`` are signed and ordered by decreasing magnitude; when two
    magnitudes tie within the pairing tolerance the positive one comes
    first.  ``lambda1_crude`` is the coarse growth-rate estimate from shell
    expansion; ``flags`` records instabilities hit along the way.
    """

    h: int
    values: list[float]
    lambda1_crude: float
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "lambda": [float(v) for v in self.values],
            "lambda1_crude": float(self.lambda1_crude),
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "EigenEstimate":
        return cls(
            h=int(payload["h"]),
            values=[float(v) for v in payload["lambda"]],
            lambda1_crude=float(payload["lambda1_crude"]),
            flags=list(payload.get("flags", [])),
        )


@dataclass(frozen=True)
class ExactSpectrum:
    """Closed-form spectrum of ``diag(p) Q`` with the projector products.

    ``zeta[i, a, b]`` is the P^{-1}-weighted product of the projections of
    the community indicators ``e_a`` and ``e_b`` onto the ``i``-th
    eigenspace; communities agree exactly when all those products match.
    ``projectors[i]`` is the projector matrix onto the ``i``-th eigenspace.
    """

    lambdas: np.ndarray
    h: int
    h_prime: int
    zeta: np.ndarray
    projectors: np.ndarray

    def zeta_vector(self, a: int, b: int) -> np.ndarray:
        return self.zeta[:, a, b]


def jacobi_eigh(S: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors in columns.
    Iterates until every off-diagonal entry is below ``tol`` relative to
    the matrix scale.
    """
    A = np.array(S, dtype=float)
    k = A.shape[0]
    V = np.eye(k)
    if k == 1:
        return np.array([A[0, 0]]), V
    scale = max(np.abs(A).max(), 1.0)
    for _ in range(max_sweeps):
        off = np.abs(A - np.diag(np.diag(A))).max()
        if off <= tol * scale:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                if abs(A[p, q]) <= tol * scale / (10 * k):
                    continue
                theta = 0.5 * math.atan2(2 * A[p, q], A[q, q] - A[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(k)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                V = V @ rot
    return np.diag(A).copy(), V


def _order_signed(values: np.ndarray) -> np.ndarray:
    """Indices sorting by decreasing magnitude, positive before negative."""
    return np.lexsort((-np.sign(values), -np.abs(values)))


def exact_spectrum(params: SbmParams) -> ExactSpectrum:
    """Distinct eigenvalues of ``diag(p) * (scale * Q)`` plus projector data.

    Works through the symmetric conjugate ``sqrt(P) Q sqrt(P)``, whose
    eigenvectors map back to the kernel's eigenvectors, so the eigenspace
    projections reduce to sums over orthonormal vectors.
    """
    p = params.p
    if np.any(p <= 0):
        raise ParameterError("p entries must be positive")
    Q = params.scaled_kernel()
    k = params.k
    sqrt_p = np.sqrt(p)
    S = sqrt_p[:, None] * Q * sqrt_p[None, :]
    eigvals, eigvecs = jacobi_eigh(S)

    order = _order_signed(eigvals)
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]

    scale = max(np.abs(eigvals).max(), 1.0)
    groups: list[list[int]] = []
    for idx, lam in enumerate(eigvals):
        if groups and abs(lam - eigvals[groups[-1][0]]) <= _EIG_GROUP_RTOL * scale:
            groups[-1].append(idx)
        else:
            groups.append([idx])

    lambdas = np.array([eigvals[g[0]] for g in groups])
    h = len(groups)
    h_prime = h - 1 if abs(lambdas[-1]) <= _EIG_GROUP_RTOL * scale else h

    # zeta_i(a, b) = sum over the group's orthonormal vectors u of
    # u_a u_b / sqrt(p_a p_b).
    zeta = np.empty((h, k, k))
    projectors = np.empty((h, k, k))
    denom = np.sqrt(np.outer(p, p))
    inv_sqrt_p = 1.0 / sqrt_p
    for gi, group in enumerate(groups):
        U = eigvecs[:, group]
        zeta[gi] = (U @ U.T) / denom
        projectors[gi] = (sqrt_p[:, None] * (U @ U.T)) * inv_sqrt_p[None, :]
    return ExactSpectrum(lambdas=lambdas, h=h, h_prime=h_prime, zeta=zeta,
                         projectors=projectors)


def vandermonde_gamma(mus) -> float:
    """Squared Vandermonde of the inputs: prod over s < t of (mu_s - mu_t)^2.

    This is the coefficient of the dominant Hankel-determinant term under
    the exact rank model; the empty product is 1.
    """
    mus = list(mus)
    out = 1.0
    for s in range(len(mus)):
        for t in range(s + 1, len(mus)):
            out *= (mus[s] - mus[t]) ** 2
    return out


def hankel_matrix(counts, m: int, start: int = 0) -> np.ndarray:
    # Long double throughout: cross-counts are integers (exactly
    # representable), and the determinants downstream are
    # cancellation-heavy.
    counts = np.asarray(counts, dtype=np.longdouble)
    if counts.size < start + 2 * m - 1:
        raise ParameterError("not enough counts for the requested matrix")
    return np.array([[counts[start + i + j] for j in range(m)] for i in range(m)],
                    dtype=np.longdouble)


def _lu_det(matrix: np.ndarray) -> float:
    """Determinant by LU with partial pivoting, in extended precision.

    The Hankel matrices here are small but can be badly conditioned, so the
    elimination runs in long double to keep the cancellation error well
    below the 1e-9 tolerances downstream.
    """
    A = matrix.astype(np.longdouble).copy()
    m = A.shape[0]
    det = np.longdouble(1.0)
    for col in range(m):
        pivot = col + int(np.argmax(np.abs(A[col:, col])))
        if A[pivot, col] == 0:
            return 0.0
        if pivot != col:
            A[[col, pivot]] = A[[pivot, col]]
            det = -det
        det *= A[col, col]
        if col + 1 < m:
            factors = A[col + 1:, col] / A[col, col]
            A[col + 1:, col:] -= factors[:, None] * A[col, col:]
    return float(det)


def moment_determinants(counts, m: int, start: int = 0) -> float:
    """Determinant of the Hankel moment matrix built on ``counts``.

    Entry (i, j) is ``counts[start + i + j]``; the empty matrix has
    determinant 1.  Uses LU with partial pivoting.
    """
    if m == 0:
        return 1.0
    if m == 1:
        return float(np.asarray(counts)[start])
    return _lu_det(hankel_matrix(counts, m, start))


def det_with_flag(counts, m: int, start: int = 0) -> tuple[float, bool]:
    """Determinant plus a flag marking values lost to cancellation.

    A determinant smaller in magnitude than ``DET_ZERO_RTOL`` times the
    product of row norms is reported as 0 so downstream ratios do not chase
    noise.
    """
    if m == 0:
        return 1.0, False
    M = hankel_matrix(counts, m, start)
    det = moment_determinants(counts, m, start)
    row_norms = np.linalg.norm(M, axis=1)
    floor = DET_ZERO_RTOL * float(np.prod(np.maximum(row_norms, 1e-300)))
    if abs(det) < floor or not np.isfinite(det):
        return 0.0, True
    return det, False


@dataclass(frozen=True)
class DepthOverrides:
    """Explicit depth control for the moment-based estimators."""

    r: int | None = None
    r_prime: int | None = None


def _clamped_depth(value: float) -> int:
    """Round the asymptotic depth formula to an integer, at least 1."""
    return max(1, int(math.floor(value + 0.5)))


_MAX_DISTINCT = 12  # hard cap on the rank-probing loop


def _self_counts(g: Graph, subset: EdgeSubset, v: int, l_max: int, r_prime: int,
                 edge_budget: int | None, budget_state: list) -> np.ndarray:
    """Cross-counts N_{l, r'}(v . v) for l = 0 .. l_max."""
    depth = max(l_max, r_prime)
    shells = neighborhood_shells(g, v, depth, edge_budget, budget_state)
    base = shells[r_prime]
    return np.array([
        cross_count_from_shells(shells[l], base, subset, g.n)
        for l in range(l_max + 1)
    ], dtype=float)


def basic_eigenvalue_approx(g: Graph, subset: EdgeSubset, c: float, v: int,
                            overrides: DepthOverrides | None = None,
                            edge_budget: int | None = None) -> EigenEstimate:
    """Single-vertex estimate of the distinct nonzero kernel eigenvalues.

    Four stages: (1) grow shells until one exceeds sqrt(n) to get a crude
    top-eigenvalue estimate; (2) probe Hankel determinants of increasing
    order until their growth statistic collapses, which fixes the count of
    distinct eigenvalues; (3) read magnitudes off determinant ratios two
    depths apart, picking the better-conditioned of the two ratio forms;
    (4) resolve signs, pairing near-equal magnitudes as (+, -).

    Raises :class:`EstimationFailure` when the vertex's component is too
    small or the work budget is exhausted.
    """
    if not 0.0 < c < 1.0:
        raise ParameterError("split probability must be in (0, 1)")
    n = g.n
    budget_state = [0]
    flags: list[str] = []

    if g.degree(v) == 0:
        raise EstimationFailure(f"vertex {v} is isolated in the residual graph",
                                stage="eigenvalue")
    try:
        sqrt_n = math.sqrt(n)
        shells = [np.array([v], dtype=np.int64)]
        growth_r = None
        while True:
            next_depth = len(shells)
            grown = neighborhood_shells(g, v, next_depth, edge_budget, budget_state)
            shells = grown
            if shells[next_depth].size > sqrt_n:
                growth_r = next_depth
                break
            if shells[next_depth].size == 0:
                raise EstimationFailure(
                    f"component of vertex {v} exhausted before reaching sqrt(n)",
                    stage="eigenvalue")
        lambda1_crude = n ** (1.0 / (2 * growth_r)) / (1.0 - c)

        log_growth = math.log((1.0 - c) * lambda1_crude)
        if log_growth <= 0:
            raise EstimationFailure("residual growth rate at or below 1",
                                    stage="eigenvalue")
        ln_n = math.log(n)
        depth_formula = (2.0 / 3.0) * ln_n / log_growth - math.sqrt(ln_n)
        # The asymptotic formula sits below the depth at which cross-counts
        # reach O(1) for any reachable n, so the default is floored at the
        # informative depth implied by the crude growth rate.  Explicit
        # overrides bypass both.
        r_info = math.ceil(0.5 * (math.log(n / c) / log_growth - 1.0))
        r_cap = math.ceil(1.5 * ln_n / log_growth)
        r = max(_clamped_depth(depth_formula), min(r_info, r_cap))
        r_prime = r
        if overrides is not None:
            if overrides.r is not None:
                r = max(1, int(overrides.r))
            if overrides.r_prime is not None:
                r_prime = max(1, int(overrides.r_prime))

        l_cap = r + 3 + 2 * (_MAX_DISTINCT - 1)
        counts = _self_counts(g, subset, v, l_cap, r_prime, edge_budget, budget_state)

        # Stage 2: grow m until the determinant-ratio statistic collapses.
        threshold = ((1.0 - c) * lambda1_crude) ** 0.75 + 1.0 / math.sqrt(ln_n)
        h_est = None
        prev_max = 1.0  # |det M_0| at both bases
        for m in range(1, _MAX_DISTINCT + 1):
            det_lo, zero_lo = det_with_flag(counts, m, start=r)
            det_hi, zero_hi = det_with_flag(counts, m, start=r + 1)
            cur_max = max(abs(det_lo), abs(det_hi))
            if zero_lo and zero_hi:
                h_est = m - 1
                break
            if prev_max == 0.0:
                flags.append("rank-collapse-denominator")
                h_est = m - 1
                break
            statistic = (n * cur_max / (c * prev_max)) ** (1.0 / (2 * r))
            if statistic < threshold:
                h_est = m - 1
                break
            prev_max = cur_max
        if h_est is None:
            h_est = _MAX_DISTINCT
            flags.append("rank-probe-cap")
        if h_est == 0:
            raise EstimationFailure("no usable cross-count signal at this vertex",
                                    stage="eigenvalue")

        # Stage 3: magnitudes from determinant ratios two depths apart.
        magnitudes: list[float] = []
        for i in range(1, h_est + 1):
            det_r0, z0 = det_with_flag(counts, i, start=r)
            det_r1, z1 = det_with_flag(counts, i, start=r + 1)
            det_r2, z2 = det_with_flag(counts, i, start=r + 2)
            det_r3, z3 = det_with_flag(counts, i, start=r + 3)
            use_far = abs(det_r1) >= math.sqrt(abs(det_r0) * abs(det_r2))
            if use_far and not (z1 or z3):
                ratio = det_r3 / det_r1
            elif not (z0 or z2):
                ratio = det_r2 / det_r0
            else:
                flags.append(f"magnitude-degenerate:{i}")
                ratio = 0.0
            if ratio < 0:
                flags.append(f"instability:{i}")
                ratio = abs(ratio)
            denom = math.prod((1.0 - c) * abs(lam) for lam in magnitudes)
            if denom == 0.0:
                flags.append(f"magnitude-zero-denominator:{i}")
                magnitudes.append(0.0)
                continue
            magnitudes.append(math.sqrt(ratio) / ((1.0 - c) * denom))

        # Stage 4: signs. Magnitude pairs within 1/ln(n) become (+, -);
        # isolated magnitudes get the signed one-depth ratio estimate.
        pair_tol = 1.0 / ln_n
        values: list[float] = [0.0] * h_est
        paired = [False] * h_est
        for i in range(h_est - 1):
            if not paired[i] and abs(magnitudes[i] - magnitudes[i + 1]) < pair_tol:
                values[i] = magnitudes[i]
                values[i + 1] = -magnitudes[i + 1]
                paired[i] = paired[i + 1] = True
        for i in range(h_est):
            if paired[i]:
                continue
            det_r0, z0 = det_with_flag(counts, i + 1, start=r)
            det_r1, z1 = det_with_flag(counts, i + 1, start=r + 1)
            if z0 or det_r0 == 0.0:
                flags.append(f"sign-degenerate:{i + 1}")
                values[i] = magnitudes[i]
                continue
            denom = math.prod((1.0 - c) * values[j] for j in range(i))
            if denom == 0.0:
                flags.append(f"sign-zero-denominator:{i + 1}")
                values[i] = magnitudes[i]
                continue
            values[i] = det_r1 / det_r0 / denom / (1.0 - c)
    except WorkBudgetExceeded:
        raise EstimationFailure(f"work budget exhausted at vertex {v}",
                                stage="eigenvalue") from None

    mags = [abs(x) for x in values]
    if any(mags[i] < mags[i + 1] for i in range(len(mags) - 1)):
        flags.append("nonmonotone-magnitudes")
    return EigenEstimate(h=h_est, values=values, lambda1_crude=lambda1_crude,
                         flags=flags)


def improved_eigenvalue_approx(g: Graph, c: float, seed: int,
                               num_probes: int | None = None,
                               threads: int = 1,
                               overrides: DepthOverrides | None = None) -> EigenEstimate:
    """Median-of-probes eigenvalue estimate on a fresh edge split.

    Splits the edges with probability ``c``, runs the single-vertex
    estimator at ``num_probes`` random vertices (each under a visited-edge
    budget of ``4 n sqrt(ln n)``), and returns the median count plus the
    per-index median of the values over the probes that reported that
    index.  Probes run in parallel over derived streams, so the result does
    not depend on ``threads``.
    """
    if g.edge_count == 0:
        raise EstimationFailure("graph has no edges", stage="eigenvalue")
    n = g.n
    if num_probes is None:
        num_probes = max(1, math.ceil(math.sqrt(math.log(n))))
    num_probes = min(num_probes, n)

    from .graphs import split_edges  # local import to avoid cycle at module load

    subset, residual = split_edges(g, c, derived_rng(seed, "eig-split").integers(2**63))
    probe_rng = derived_rng(seed, "eig-probes")
    probes = probe_rng.choice(n, size=num_probes, replace=False)
    # Work cap per probe.  The floor of one full adjacency scan keeps the
    # cap from killing probes on denser graphs: a single BFS pass is the
    # baseline cost of the estimator, the cap only guards runaway work.
    budget = None
    if n > 1:
        budget = max(int(4 * n * math.sqrt(math.log(n))),
                     2 * residual.edge_count + n)

    def run_probe(v: int):
        try:
            return basic_eigenvalue_approx(residual, subset, c, int(v),
                                           overrides=overrides, edge_budget=budget)
        except EstimationFailure:
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_probe, probes))
    else:
        results = [run_probe(v) for v in probes]

    ok = [r for r in results if r is not None]
    if not ok:
        raise EstimationFailure("all eigenvalue probes failed", stage="eigenvalue")
    combined = combine_probe_estimates(ok)
    if len(ok) < len(results):
        combined.flags.append(f"failed-probes:{len(results) - len(ok)}")
    return combined


def combine_probe_estimates(estimates: list[EigenEstimate]) -> EigenEstimate:
    """Median count, then per-index medians over the probes reporting that
    index."""
    if not estimates:
        raise ParameterError("no estimates to combine")
    h_median = int(math.floor(np.median([e.h for e in estimates]) + 0.5))
    values: list[float] = []
    for i in range(h_median):
        reported = [e.values[i] for e in estimates if e.h > i]
        if not reported:
            break
        values.append(float(np.median(reported)))
    flags = sorted({f for e in estimates for f in e.flags})
    crude = float(np.median([e.lambda1_crude for e in estimates]))
    return EigenEstimate(h=len(values), values=values, lambda1_crude=crude,
                         flags=flags)
