"""Exact recovery by degree profiling.

A vertex's degree profile (neighbour counts per alleged community) is
approximately multivariate Poisson in the logarithmic-degree regime, so
re-classifying each vertex by Poisson likelihood cleans up a preliminary
labeling.  The divergence between profile means decides which communities
are distinguishable at all: groups of communities closer than 1 in the
divergence are merged into the finest recoverable partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, PipelineError
from .graphs import CommunityLabels, Graph, SbmParams, split_edges
from .rng import derived_seed
from .sphere import ClassificationResult, Status, agnostic_sphere_comparison

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def ch_divergence(mu, nu, tol: float = 1e-8) -> tuple[float, float]:
    """Chernoff-Hellinger divergence between two nonnegative vectors.

    Maximizes ``g(t) = sum_x [t mu(x) + (1-t) nu(x) - mu(x)^t nu(x)^(1-t)]``
    over ``t`` in [0, 1] by golden-section search (g is concave in t).
    Returns ``(max value, maximizer)``; ``0^t c^(1-t)`` is 0 for interior t.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape or mu.ndim != 1:
        raise ParameterError("mu and nu must be vectors of equal length")
    if np.any(mu < 0) or np.any(nu < 0):
        raise ParameterError("divergence arguments must be nonnegative")
    if not (mu.any() or nu.any()):
        raise ParameterError("divergence arguments must not both be zero")

    def g(t: float) -> float:
        mixed = t * mu + (1.0 - t) * nu
        geo = np.zeros_like(mu)
        both = (mu > 0) & (nu > 0)
        geo[both] = mu[both] ** t * nu[both] ** (1.0 - t)
        if t == 0.0:
            geo[(mu == 0) & (nu > 0)] = nu[(mu == 0) & (nu > 0)]
        if t == 1.0:
            geo[(nu == 0) & (mu > 0)] = mu[(nu == 0) & (mu > 0)]
        return float((mixed - geo).sum())

    lo, hi = 0.0, 1.0
    a = hi - _GOLDEN * (hi - lo)
    b = lo + _GOLDEN * (hi - lo)
    ga, gb = g(a), g(b)
    while hi - lo > tol:
        if ga < gb:
            lo, a, ga = a, b, gb
            b = lo + _GOLDEN * (hi - lo)
            gb = g(b)
        else:
            hi, b, gb = b, a, ga
            a = hi - _GOLDEN * (hi - lo)
            ga = g(a)
    t_star = 0.5 * (lo + hi)
    return max(g(t_star), 0.0), t_star


@dataclass(frozen=True)
class ProfileMeans:
    """Expected degree profiles per community: ``theta[j]`` is the mean
    profile of a community-``j`` vertex at graph size ``n``."""

    theta: np.ndarray
    n: int

    @classmethod
    def from_estimate(cls, est: "ParamEstimate", n: int,
                      keep_fraction: float = 1.0) -> "ProfileMeans":
        """Means ``ln(n) * p_i * Q_ij`` scaled by the retained edge fraction."""
        pq = est.p_hat[:, None] * est.Q_hat
        return cls(theta=(math.log(n) * keep_fraction) * pq.T.copy(), n=n)


@dataclass(frozen=True)
class DivergenceMatrix:
    """Pairwise divergences between profile-mean columns and the finest
    partition they induce (classes closer than 1 are merged transitively)."""

    d_plus: np.ndarray
    t_star: np.ndarray
    finest: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return self.d_plus.shape[0]

    def group_of(self) -> np.ndarray:
        out = np.empty(self.k, dtype=np.int64)
        for gi, group in enumerate(self.finest):
            for member in group:
                out[member] = gi
        return out

    def to_json(self) -> dict:
        return {
            "d_plus": self.d_plus.tolist(),
            "t_star": self.t_star.tolist(),
            "finest": [list(group) for group in self.finest],
        }


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def finest_partition(source, n: int | None = None) -> DivergenceMatrix:
    """Divergence matrix of the kernel's weighted columns plus the finest
    partition with all cross-class divergences at least 1.

    ``source`` is either :class:`SbmParams` or :class:`ParamEstimate`; the
    columns compared are those of ``diag(p) Q``.
    """
    if isinstance(source, SbmParams):
        p, Q = source.p, source.scaled_kernel()
    else:
        p, Q = source.p_hat, source.Q_hat
    k = p.size
    pq = p[:, None] * Q
    d_plus = np.zeros((k, k))
    t_star = np.full((k, k), 0.5)
    uf = _UnionFind(k)
    for i in range(k):
        for j in range(i + 1, k):
            value, ts = ch_divergence(pq[:, i], pq[:, j])
            d_plus[i, j] = d_plus[j, i] = value
            t_star[i, j] = ts
            t_star[j, i] = 1.0 - ts
            if value < 1.0:
                uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(uf.find(i), []).append(i)
    finest = tuple(tuple(sorted(g)) for g in
                   sorted(groups.values(), key=lambda g: g[0]))
    return DivergenceMatrix(d_plus=d_plus, t_star=t_star, finest=finest)


@dataclass(frozen=True)
class DegreeProfile:
    """Neighbour counts of one vertex split by community label."""

    d: np.ndarray
    vertex: int

    def degree(self) -> int:
        return int(self.d.sum())


def degree_profile(g: Graph, labels: CommunityLabels, v: int) -> DegreeProfile:
    """Count ``v``'s neighbours per community; the vertex itself never
    contributes."""
    neigh = g.neighbors(v)
    counts = np.bincount(labels.labels[neigh], minlength=labels.k)
    return DegreeProfile(d=counts.astype(np.int64), vertex=v)


def all_degree_profiles(g: Graph, labels: CommunityLabels) -> np.ndarray:
    """(n, k) matrix of degree profiles, vectorized over vertices."""
    n, k = g.n, labels.k
    out = np.zeros((n, k), dtype=np.int64)
    if g.edge_count:
        tails = np.repeat(np.arange(n), np.diff(g.indptr))
        np.add.at(out, (tails, labels.labels[g.indices]), 1)
    return out


@dataclass(frozen=True)
class ParamEstimate:
    """Plug-in estimate of the prior and kernel from a labeling."""

    p_hat: np.ndarray
    Q_hat: np.ndarray
    empty_classes: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return self.p_hat.size

    def to_json(self) -> dict:
        return {
            "p_hat": self.p_hat.tolist(),
            "Q_hat": self.Q_hat.tolist(),
            "empty_classes": list(self.empty_classes),
        }


def estimate_params(g: Graph, labels: CommunityLabels, regime) -> ParamEstimate:
    """Label frequencies and rescaled edge densities between alleged
    communities.

    The density scaling matches the sampling regime: ``n / ln(n)`` for
    logarithmic degrees, ``n`` for constant degrees.  Rows and columns of
    empty classes are zero and reported in ``empty_classes``.
    """
    from .graphs import Regime  # local import, avoids cycle in type hints

    if len(labels) != g.n:
        raise ParameterError("labels length must match the graph")
    n, k = g.n, labels.k
    counts = labels.counts()
    p_hat = counts / n
    pair_edges = np.zeros((k, k), dtype=np.int64)
    if g.edge_count:
        a = labels.labels[g.edges[:, 0]]
        b = labels.labels[g.edges[:, 1]]
        np.add.at(pair_edges, (a, b), 1)
        np.add.at(pair_edges, (b, a), 1)
        # Diagonal got every within-class edge twice; keep a single count.
        np.fill_diagonal(pair_edges, np.diag(pair_edges) // 2)
    pairs = np.outer(counts, counts).astype(float)
    np.fill_diagonal(pairs, counts * (counts - 1) / 2.0)
    factor = n / math.log(n) if regime is Regime.LOGARITHMIC else float(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        Q_hat = np.where(pairs > 0, factor * pair_edges / pairs, 0.0)
    empty = tuple(int(i) for i in np.flatnonzero(counts == 0))
    return ParamEstimate(p_hat=p_hat, Q_hat=Q_hat, empty_classes=empty)


def _log_likelihoods(profiles: np.ndarray, means: ProfileMeans,
                     p_hat: np.ndarray) -> np.ndarray:
    """(n, k) log a-posteriori scores; impossible hypotheses are -inf.

    A zero mean with a positive count excludes the hypothesis; a zero
    count contributes nothing.
    """
    theta = means.theta
    k = theta.shape[0]
    profiles = np.atleast_2d(profiles).astype(float)
    scores = np.full((profiles.shape[0], k), -np.inf)
    for j in range(k):
        row = theta[j]
        with np.errstate(divide="ignore", invalid="ignore"):
            log_row = np.where(row > 0, np.log(np.maximum(row, 1e-300)), 0.0)
        term = profiles @ log_row - row.sum()
        impossible = (profiles[:, row == 0] > 0).any(axis=1) if (row == 0).any() else \
            np.zeros(profiles.shape[0], dtype=bool)
        prior = math.log(p_hat[j]) if p_hat[j] > 0 else -np.inf
        scores[:, j] = np.where(impossible, -np.inf, term + prior)
    return scores


def map_classify_profile(profile: DegreeProfile | np.ndarray, est: ParamEstimate,
                         n: int, keep_fraction: float = 1.0) -> int:
    """Most likely community for one degree profile under Poisson means.

    Ties break to the lowest index.  Raises :class:`PipelineError` when
    every hypothesis is impossible; callers fall back to the prior argmax.
    """
    d = profile.d if isinstance(profile, DegreeProfile) else np.asarray(profile)
    means = ProfileMeans.from_estimate(est, n, keep_fraction)
    scores = _log_likelihoods(d[None, :], means, est.p_hat)[0]
    if not np.isfinite(scores).any():
        raise PipelineError("all profile hypotheses impossible", stage="map")
    return int(np.argmax(scores))


def composite_classify_profile(profile: DegreeProfile | np.ndarray,
                               est: ParamEstimate, n: int,
                               partition, keep_fraction: float = 1.0) -> int:
    """Most likely community group for one profile (log-sum-exp over each
    group's mixture); ties break to the lowest group index."""
    d = profile.d if isinstance(profile, DegreeProfile) else np.asarray(profile)
    means = ProfileMeans.from_estimate(est, n, keep_fraction)
    scores = _log_likelihoods(d[None, :], means, est.p_hat)[0]
    group_scores = _group_scores(scores[None, :], partition)[0]
    if not np.isfinite(group_scores).any():
        raise PipelineError("all group hypotheses impossible", stage="composite")
    return int(np.argmax(group_scores))


def _group_scores(scores: np.ndarray, partition) -> np.ndarray:
    out = np.full((scores.shape[0], len(partition)), -np.inf)
    for gi, group in enumerate(partition):
        block = scores[:, list(group)]
        peak = block.max(axis=1)
        finite = np.isfinite(peak)
        with np.errstate(invalid="ignore"):
            summed = np.log(np.exp(block - peak[:, None]).sum(axis=1)) + peak
        out[finite, gi] = summed[finite]
    return out


def _classify_all(profiles: np.ndarray, est: ParamEstimate, n: int,
                  keep_fraction: float, partition=None) -> np.ndarray:
    """Vectorized MAP (or composite) classification of every row."""
    means = ProfileMeans.from_estimate(est, n, keep_fraction)
    scores = _log_likelihoods(profiles, means, est.p_hat)
    if partition is not None:
        scores = _group_scores(scores, partition)
    hopeless = ~np.isfinite(scores).any(axis=1)
    if hopeless.any():
        # fall back to the prior argmax for vertices with no viable hypothesis
        if partition is None:
            fallback = int(np.argmax(est.p_hat))
        else:
            group_mass = [est.p_hat[list(g)].sum() for g in partition]
            fallback = int(np.argmax(group_mass))
        scores[hopeless] = -np.inf
        scores[hopeless, fallback] = 0.0
    return np.argmax(scores, axis=1)


def _compact_labels(labels: np.ndarray, k: int) -> tuple[CommunityLabels, dict]:
    """Drop empty classes and renumber, recording the contraction map."""
    present = np.flatnonzero(np.bincount(labels, minlength=k) > 0)
    remap = -np.ones(k, dtype=np.int64)
    remap[present] = np.arange(present.size)
    contraction = {int(old): int(new) for old, new in zip(present, np.arange(present.size))}
    return CommunityLabels(remap[labels], present.size), contraction


@dataclass
class ExactRecoveryResult:
    """Output of the exact-recovery pipeline: per-vertex group labels over
    the finest partition, plus the divergence matrix and the final
    parameter estimate behind it."""

    group_labels: CommunityLabels
    divergence: DivergenceMatrix
    params: ParamEstimate
    diagnostics: dict = field(default_factory=dict)


def agnostic_degree_profiling(g: Graph, gamma: float | None = None,
                              delta_for_partial: float = 0.25,
                              seed: int = 0, threads: int = 1,
                              preliminary: CommunityLabels | None = None) -> ExactRecoveryResult:
    """Parameter-free exact recovery of the finest recoverable partition.

    Splits the edges (keeping a ``gamma`` fraction for the partial stage),
    runs sphere comparison on the kept part, estimates parameters from the
    residual part, re-classifies every vertex by its Poisson degree
    profile, re-estimates, and finally assigns every vertex to a group of
    the finest partition by composite likelihood.

    ``preliminary`` bypasses the sphere-comparison stage with a caller
    -provided rough labeling (useful when the partial stage's own
    preconditions fail); the cleanup stages are unchanged.
    """
    n = g.n
    if n < 2:
        raise ParameterError("graph too small")
    if gamma is None:
        gamma = math.log(math.log(n)) / (4.0 * math.log(n))
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError("gamma must be in [0, 1]")

    from .graphs import Regime

    kept, residual = split_edges(g, gamma, derived_seed(seed, "profiling-split"))
    kept_graph = Graph(g.n, kept.edges)

    diagnostics: dict = {"gamma": gamma}
    if preliminary is None:
        partial = agnostic_sphere_comparison(kept_graph, delta_for_partial,
                                             seed=derived_seed(seed, "partial"),
                                             threads=threads)
        if not partial.ok:
            raise PipelineError(
                f"partial recovery failed: {partial.diagnostics.get('reason')}",
                stage="partial-recovery")
        sigma1 = partial.labels
        diagnostics["partial"] = partial.sidecar()
    else:
        if len(preliminary) != n:
            raise ParameterError("preliminary labels length must match the graph")
        sigma1 = preliminary
        diagnostics["partial"] = {"status": "provided"}

    sigma1, contraction1 = _compact_labels(sigma1.labels, sigma1.k)
    keep_fraction = 1.0 - gamma

    est1 = estimate_params(residual, sigma1, Regime.LOGARITHMIC)
    profiles1 = all_degree_profiles(residual, sigma1)
    sigma2_raw = _classify_all(profiles1, est1, n, keep_fraction=1.0)
    sigma2, contraction2 = _compact_labels(sigma2_raw, sigma1.k)

    est2 = estimate_params(residual, sigma2, Regime.LOGARITHMIC)
    divergence = finest_partition(est2)
    profiles2 = all_degree_profiles(residual, sigma2)
    groups_raw = _classify_all(profiles2, est2, n, keep_fraction=1.0,
                               partition=divergence.finest)
    diagnostics["contractions"] = [contraction1, contraction2]
    diagnostics["keep_fraction"] = keep_fraction
    return ExactRecoveryResult(
        group_labels=CommunityLabels(groups_raw, len(divergence.finest)),
        divergence=divergence,
        params=est2,
        diagnostics=diagnostics,
    )
