"""Agnostic partial recovery by sphere comparison.

The pipeline estimates the kernel spectrum, derives hyperparameters from
it, repeatedly runs a single-shot classifier (probe vertices are compared
pairwise through split-edge cross-count statistics, one anchor per alleged
community classifies everyone else) and merges the repetitions by majority
consensus.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .alignment import best_assignment, confusion_matrix, disagreement
from .errors import (ComparisonFailure, EstimationFailure,
                     NoFeasibleHyperparameters, ParameterError, PipelineError)
from .graphs import (CommunityLabels, EdgeSubset, Graph,
                     cross_count_from_shells, neighborhood_shells, split_edges)
from .rng import derived_rng, derived_seed
from .spectral import (DepthOverrides, EigenEstimate, det_with_flag,
                       improved_eigenvalue_approx, vandermonde_gamma)


@dataclass
class ZetaEstimate:
    """Approximate eigenspace products ``z_1 .. z_h`` for a vertex pair.

    ``unreliable`` lists 1-based indices whose denominator determinant was
    numerically zero; those entries are NaN.
    """

    z: list[float]
    v: int
    v_prime: int
    r: int
    r_prime: int
    unreliable: frozenset[int] = frozenset()

    def reliable(self, i: int) -> bool:
        return i not in self.unreliable


def _pad_values(values: list[float]) -> list[float]:
    """Eigenvalue list with the sentinel 0 appended (one past the last)."""
    return list(values) + [0.0]


def zeta_from_counts(counts: np.ndarray, r: int, r_prime: int, n: int, c: float,
                     values: list[float], v: int = -1, v_prime: int = -1) -> ZetaEstimate:
    """Eigenspace products from a cross-count sequence.

    ``counts[l]`` must hold the count at depth pair ``(l, r_prime)`` for
    ``l`` up to ``r + 2h - 1``.  Boundary conventions: the order-0
    denominator is 1, the leading-ratio factor for the first index is 1,
    and the eigenvalue one past the last is 0.
    """
    lam = _pad_values(values)  # lam[i] is 1-based; lam[h] == 0 sentinel
    h = len(values)
    one_minus_c = 1.0 - c
    z: list[float] = []
    bad: set[int] = set()
    for i in range(1, h + 1):
        lam_i = lam[i - 1]
        lam_next = lam[i] if i < h + 1 else 0.0
        num_det_hi, _ = det_with_flag(counts, i, start=r + 1)
        num_det_lo, _ = det_with_flag(counts, i, start=r)
        prod_below = math.prod(lam[j] for j in range(i - 1))
        numerator = num_det_hi - (one_minus_c ** i) * lam_next * prod_below * num_det_lo
        if i == 1:
            denominator = 1.0
            den_zero = False
        else:
            den_det_hi, zhi = det_with_flag(counts, i - 1, start=r + 1)
            den_det_lo, zlo = det_with_flag(counts, i - 1, start=r)
            prod_den = math.prod(lam[j] for j in range(i - 2))
            denominator = den_det_hi - (one_minus_c ** (i - 1)) * lam_i * prod_den * den_det_lo
            den_zero = (zhi and zlo) or denominator == 0.0
        gamma_below = vandermonde_gamma(one_minus_c * lam[j] for j in range(i - 1))
        gamma_here = vandermonde_gamma(one_minus_c * lam[j] for j in range(i))
        if i == 1:
            lead = 1.0  # limit convention for the nonexistent larger eigenvalue
        else:
            lead = (lam[i - 2] - lam_i) / lam[i - 2] if lam[i - 2] != 0 else 0.0
        gap_next = lam_i - lam_next
        scale_pow = (one_minus_c * lam_i) ** (-(r + r_prime + 1)) if lam_i != 0 else 0.0
        if den_zero or gap_next == 0.0 or gamma_here == 0.0 or lam_i == 0.0:
            bad.add(i)
            z.append(float("nan"))
            continue
        factor = n * lead * gamma_below / (c * gap_next * gamma_here)
        z.append(numerator / denominator * factor * scale_pow)
    return ZetaEstimate(z=z, v=v, v_prime=v_prime, r=r, r_prime=r_prime,
                        unreliable=frozenset(bad))


def _pair_counts(g: Graph, subset: EdgeSubset, shells_v, shells_vp, r_prime: int,
                 l_max: int) -> np.ndarray:
    base = shells_vp[r_prime] if r_prime < len(shells_vp) else np.empty(0, dtype=np.int64)
    return np.array([
        cross_count_from_shells(
            shells_v[l] if l < len(shells_v) else np.empty(0, dtype=np.int64),
            base, subset, g.n)
        for l in range(l_max + 1)
    ], dtype=float)


def vertex_product_approx(g: Graph, subset: EdgeSubset, c: float, v: int,
                          v_prime: int, r: int, r_prime: int,
                          eigs: EigenEstimate,
                          shells_v=None, shells_vp=None) -> ZetaEstimate:
    """Approximate the eigenspace products for the pair ``(v, v_prime)``.

    The deep side is ``v`` (shells to ``r + 2h + 3``), the shallow side is
    ``v_prime`` (shells to ``r_prime``); pass precomputed shells to avoid
    repeated BFS.
    """
    if eigs.h < 1:
        raise ParameterError("eigenvalue estimate is empty")
    h = eigs.h
    l_max = r + 2 * h - 1
    if shells_v is None:
        shells_v = neighborhood_shells(g, v, r + 2 * h + 3)
    if shells_vp is None:
        shells_vp = neighborhood_shells(g, v_prime, r_prime)
    counts = _pair_counts(g, subset, shells_v, shells_vp, r_prime, l_max)
    return zeta_from_counts(counts, r, r_prime, g.n, c, eigs.values,
                            v=v, v_prime=v_prime)


def comparison_threshold(x: float, delta: float) -> float:
    """Separation slack allowed before two vertices are declared different."""
    return 5.0 * (2.0 * x / math.sqrt(delta) + x * x)


def differ_from_z(z_vv: ZetaEstimate, z_vvp: ZetaEstimate, z_vpvp: ZetaEstimate,
                  x: float, delta: float) -> bool:
    """Decide Different/Same from three product estimates.

    Different iff some index shows a quadratic-form gap above the
    threshold.  Raises :class:`ComparisonFailure` if any needed index is
    unreliable.
    """
    h = len(z_vv.z)
    threshold = comparison_threshold(x, delta)
    for i in range(1, h + 1):
        if not (z_vv.reliable(i) and z_vvp.reliable(i) and z_vpvp.reliable(i)):
            raise ComparisonFailure(f"unstable product estimate at index {i}",
                                    stage="compare")
        gap = z_vv.z[i - 1] - 2.0 * z_vvp.z[i - 1] + z_vpvp.z[i - 1]
        if gap > threshold:
            return True
    return False


def compare_vertices(g: Graph, subset: EdgeSubset, v: int, v_prime: int,
                     r: int, r_prime: int, x: float, c: float,
                     eigs: EigenEstimate, delta: float,
                     shells_v=None, shells_vp=None) -> bool:
    """True when ``v`` and ``v_prime`` are judged to sit in different
    communities."""
    z_cross = vertex_product_approx(g, subset, c, v, v_prime, r, r_prime, eigs,
                                    shells_v=shells_v, shells_vp=shells_vp)
    z_self_v = vertex_product_approx(g, subset, c, v, v, r, r_prime, eigs,
                                     shells_v=shells_v, shells_vp=shells_v)
    z_self_vp = vertex_product_approx(g, subset, c, v_prime, v_prime, r, r_prime,
                                      eigs, shells_v=shells_vp, shells_vp=shells_vp)
    return differ_from_z(z_self_v, z_cross, z_self_vp, x, delta)


def classify_from_z(zz_self: list[list[float]], zz_cross: list[list[float]],
                    unreliable_self: list[frozenset] | None = None,
                    unreliable_cross: list[frozenset] | None = None) -> int:
    """Anchor index minimizing the worst pairwise claim margin.

    ``zz_self[s][i]`` is the self-product of anchor ``s``; ``zz_cross[s][i]``
    its product with the vertex under classification.  Ties break to the
    lowest anchor index; anchors with no usable index are never chosen.
    Returns -1 when no anchor is usable.
    """
    count = len(zz_self)
    if count == 1:
        return 0
    h = len(zz_self[0])
    usable = [[True] * h for _ in range(count)]
    for s in range(count):
        bad = set()
        if unreliable_self is not None:
            bad |= set(unreliable_self[s])
        if unreliable_cross is not None:
            bad |= set(unreliable_cross[s])
        for i in bad:
            if 1 <= i <= h:
                usable[s][i - 1] = False
    best_sigma, best_margin = -1, float("inf")
    for s in range(count):
        worst = -float("inf")
        any_term = False
        for t in range(count):
            if t == s:
                continue
            for i in range(h):
                if not (usable[s][i] and usable[t][i]):
                    continue
                any_term = True
                claim_s = zz_self[s][i] - 2.0 * zz_cross[s][i]
                claim_t = zz_self[t][i] - 2.0 * zz_cross[t][i]
                worst = max(worst, claim_s - claim_t)
        if not any_term:
            continue
        if worst < best_margin:
            best_margin, best_sigma = worst, s
    return best_sigma


class Status(Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass
class ClassificationResult:
    """Outcome of a (single or merged) classification attempt."""

    status: Status
    labels: CommunityLabels | None = None
    k_found: int = 0
    anchors: list[int] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is Status.OK

    def sidecar(self) -> dict:
        return {
            "status": self.status.value,
            "k_found": self.k_found,
            "y_doubleprime": self.diagnostics.get("y_doubleprime"),
            "hyperparams": self.diagnostics.get("hyperparams"),
            "eigen_estimate": self.diagnostics.get("eigen_estimate"),
        }


@dataclass(frozen=True)
class HyperParams:
    """Derived knobs for the single-shot classifier."""

    x: Fraction
    epsilon: Fraction
    c: Fraction
    m: int
    delta: float

    def to_json(self) -> dict:
        return {
            "x": str(self.x),
            "epsilon": str(self.epsilon),
            "c": str(self.c),
            "m": self.m,
            "delta": self.delta,
        }


def _failure_bound(x: float, lam1: float, lam_h: float, delta: float,
                   k_prime: int, m: int, damp: float = 1.0) -> float | None:
    """Run-failure bound from the probe-goodness tail; None when the
    underlying series diverges (requires damp * lam_h^4 > 4 lam1^3)."""
    ratio = damp * lam_h ** 4 / (4.0 * lam1 ** 3) - 1.0
    if ratio <= 0:
        return None
    exponent = (x * x * damp * lam_h ** 2 * delta
                / (16.0 * lam1 * k_prime ** 1.5 * (delta ** -0.5 + x)))
    if exponent <= 0:
        return None
    tail = math.exp(-exponent)
    series = tail / (1.0 - tail ** ratio) if tail ** ratio < 1.0 else None
    if series is None:
        return None
    return k_prime * (1.0 - delta) ** m + m * 2.0 * k_prime * series


def _epsilon_ok(eps: float, lam1: float, lam_h: float, damp: float = 1.0) -> bool:
    """Both depth-window conditions on the depth-split exponent."""
    base = 2.0 * damp * lam1 ** 3 / lam_h ** 2
    if base <= 0 or damp * lam1 <= 1.0:
        return False
    if base ** (1.0 - eps / 3.0) >= damp * lam1:
        return False
    # Division parsed left-to-right: (lam_h^2 / 2) * lam1, the reading under
    # which the reference two-eigenvalue worked example admits a solution.
    window = damp * (lam_h ** 2 / 2.0) * lam1
    if window <= 1.0:
        return False
    return (1.0 + eps / 3.0) > math.log(damp * lam1) / math.log(window)


_X_NUMERATOR_MAX = 64
_EPS_Z_MAX = 64
_C_DENOM_MAX = 64


def select_hyperparameters(eigs: EigenEstimate, delta: float, m: int,
                           n: int) -> HyperParams:
    """Search the smallest admissible (x, epsilon, c) for the classifier.

    Widens the eigenvalue estimates by the estimation tolerance, then scans
    x by increasing numerator/denominator, epsilon over unit-style
    rationals, and c over unit reciprocals below 1/9, requiring the failure
    bound, the depth-window conditions and their split-damped versions to
    hold.  When a later stage exhausts its grid the earlier stages advance
    to their next admissible candidate before giving up.
    """
    if not 0.0 < delta <= 1.0:
        raise ParameterError("delta must be in (0, 1]")
    if eigs.h < 1 or not eigs.values:
        raise ParameterError("eigenvalue estimate is empty")
    widen = 2.0 * math.log(n) ** -1.5 if n > 1 else 0.0
    lam1 = eigs.values[0] + widen
    lam_h = eigs.values[-1] - widen if eigs.h > 1 else eigs.values[0] - widen
    k_prime = int(1.0 / delta)
    if lam1 <= 0 or lam_h == 0:
        raise NoFeasibleHyperparameters(
            "widened eigenvalue estimates are degenerate",
            failed_inequality="positive-spectrum", stage="hyperparameters")
    lam_h = abs(lam_h)

    first_failure: str | None = None

    def x_candidates():
        for numerator in range(1, _X_NUMERATOR_MAX + 1):
            for denominator in range(1, _X_NUMERATOR_MAX + 1):
                yield Fraction(numerator, denominator)

    def eps_candidates():
        for z in range(2, _EPS_Z_MAX + 1):
            yield Fraction(1, z)
            if z > 2:
                yield Fraction(z - 1, z)

    xs = []
    for x in x_candidates():
        bound = _failure_bound(float(x), lam1, lam_h, delta, k_prime, m)
        if bound is None:
            if first_failure is None:
                first_failure = "failure-bound-series (requires lam_h^4 > 4 lam1^3)"
            continue
        if bound < 0.5:
            xs.append(x)
    if not xs:
        raise NoFeasibleHyperparameters(
            "no x satisfies the failure bound",
            failed_inequality=first_failure or "failure-bound",
            stage="hyperparameters")

    for x in xs:
        eps_list = [e for e in eps_candidates() if _epsilon_ok(float(e), lam1, lam_h)]
        if not eps_list:
            if first_failure is None:
                first_failure = "depth-window"
            continue
        for eps in eps_list:
            for denom in range(10, _C_DENOM_MAX + 1):
                c = Fraction(1, denom)
                damp = 1.0 - float(c)
                if damp * lam_h ** 4 <= 4.0 * lam1 ** 3:
                    if first_failure is None:
                        first_failure = "split-damped-quartic ((1-c) lam_h^4 > 4 lam1^3)"
                    continue
                if not _epsilon_ok(float(eps), lam1, lam_h, damp=damp):
                    if first_failure is None:
                        first_failure = "split-damped depth-window"
                    continue
                bound = _failure_bound(float(x), lam1, lam_h, delta, k_prime, m,
                                       damp=damp)
                if bound is None or bound >= 0.5:
                    if first_failure is None:
                        first_failure = "split-damped failure bound"
                    continue
                return HyperParams(x=x, epsilon=eps, c=c, m=m, delta=delta)
    raise NoFeasibleHyperparameters(
        "hyperparameter search bounds exhausted",
        failed_inequality=first_failure or "split-damped failure bound",
        stage="hyperparameters")


def _merge_probe_classes(verdicts: dict[tuple[int, int], bool], m: int,
                         max_classes: int) -> list[list[int]] | None:
    """Group probes by the Same/Different verdicts; None when inconsistent."""
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (i, j), different in verdicts.items():
        if not different:
            parent[find(i)] = find(j)
    for (i, j), different in verdicts.items():
        if different and find(i) == find(j):
            return None
    classes: dict[int, list[int]] = {}
    for i in range(m):
        classes.setdefault(find(i), []).append(i)
    grouped = sorted(classes.values(), key=lambda xs: xs[0])
    if not 1 <= len(grouped) <= max_classes:
        return None
    return grouped


def _anchor_field(subset: EdgeSubset, shell: np.ndarray, n: int) -> np.ndarray:
    """Per-vertex count of subset edges into ``shell``."""
    mask = np.zeros(n, dtype=bool)
    if shell.size:
        mask[shell] = True
    hits = mask[subset.indices].astype(np.int64)
    prefix = np.concatenate(([0], np.cumsum(hits)))
    return (prefix[subset.indptr[1:]] - prefix[subset.indptr[:-1]]).astype(float)


def unreliable_classify(g: Graph, hp: HyperParams, eigs: EigenEstimate,
                        seed: int, threads: int = 1,
                        overrides: DepthOverrides | None = None) -> ClassificationResult:
    """One classification attempt: probe, compare, anchor, classify.

    Fails (rather than guessing) when the probe comparisons are not an
    equivalence relation with an admissible number of classes.
    """
    n = g.n
    c = float(hp.c)
    eps = float(hp.epsilon)
    x = float(hp.x)
    if eigs.h < 1:
        return ClassificationResult(Status.FAILED,
                                    diagnostics={"reason": "empty eigenvalue estimate"})
    lam1 = eigs.values[0]
    if (1.0 - c) * lam1 <= 1.0:
        return ClassificationResult(Status.FAILED,
                                    diagnostics={"reason": "residual growth rate at or below 1"})
    subset, residual = split_edges(g, c, derived_seed(seed, "classify-split"))
    m = min(hp.m, n)
    probes = derived_rng(seed, "classify-probes").choice(n, size=m, replace=False)
    probes = [int(v) for v in probes]

    ln_n = math.log(n)
    growth = math.log((1.0 - c) * lam1)
    r = (1.0 - eps / 3.0) * ln_n / growth - math.sqrt(ln_n)
    r_prime = (2.0 * eps / 3.0) * ln_n / growth
    r = max(1, int(math.floor(r + 0.5)))
    r_prime = max(1, int(math.floor(r_prime + 0.5)))
    # Same informative-depth floor as the spectral module: push the anchor
    # side down until expected counts reach O(1).
    r_info = math.ceil(math.log(n / c) / growth - 1.0 - r_prime)
    r = min(max(r, r_info), math.ceil(1.5 * ln_n / growth))
    if overrides is not None:
        if overrides.r is not None:
            r = max(1, int(overrides.r))
        if overrides.r_prime is not None:
            r_prime = max(1, int(overrides.r_prime))

    h = eigs.h
    deep = r + 2 * h + 3
    probe_shells = {v: neighborhood_shells(residual, v, deep) for v in probes}

    verdicts: dict[tuple[int, int], bool] = {}
    try:
        for a in range(m):
            for b in range(a + 1, m):
                verdicts[(a, b)] = compare_vertices(
                    residual, subset, probes[a], probes[b], r, r_prime, x, c,
                    eigs, hp.delta,
                    shells_v=probe_shells[probes[a]],
                    shells_vp=probe_shells[probes[b]])
    except ComparisonFailure as exc:
        return ClassificationResult(Status.FAILED,
                                    diagnostics={"reason": str(exc), "r": r,
                                                 "r_prime": r_prime})

    classes = _merge_probe_classes(verdicts, m, max_classes=int(1.0 / hp.delta))
    if classes is None:
        return ClassificationResult(Status.FAILED,
                                    diagnostics={"reason": "probe comparisons inconsistent",
                                                 "r": r, "r_prime": r_prime})
    anchor_rng = derived_rng(seed, "classify-anchors")
    anchors = [probes[cls[int(anchor_rng.integers(len(cls)))]] for cls in classes]
    k_found = len(anchors)

    l_max = r + 2 * h - 1
    fields = []
    zz_self: list[list[float]] = []
    unreliable_self: list[frozenset] = []
    for a in anchors:
        shells_a = probe_shells[a]
        fields.append(np.stack([
            _anchor_field(subset,
                          shells_a[l] if l < len(shells_a) else np.empty(0, np.int64),
                          n)
            for l in range(l_max + 1)
        ]))
        z_self = vertex_product_approx(residual, subset, c, a, a, r, r_prime,
                                       eigs, shells_v=shells_a, shells_vp=shells_a)
        zz_self.append(z_self.z)
        unreliable_self.append(z_self.unreliable)

    labels = np.zeros(n, dtype=np.int64)
    failed_count = [0]

    def classify_block(block: np.ndarray) -> np.ndarray:
        out = np.empty(block.size, dtype=np.int64)
        fails = 0
        for pos, vertex in enumerate(block):
            shells_v = neighborhood_shells(residual, int(vertex), r_prime)
            shell = shells_v[r_prime]
            zz_cross = []
            unreliable_cross = []
            for s in range(k_found):
                counts = (fields[s][:, shell].sum(axis=1)
                          if shell.size else np.zeros(l_max + 1))
                z = zeta_from_counts(counts, r, r_prime, n, c, eigs.values,
                                     v=anchors[s], v_prime=int(vertex))
                zz_cross.append(z.z)
                unreliable_cross.append(z.unreliable)
            choice = classify_from_z(zz_self, zz_cross, unreliable_self,
                                     unreliable_cross)
            if choice < 0:
                fails += 1
                choice = 0
            out[pos] = choice
        failed_count[0] += fails
        return out

    vertices = np.arange(n)
    if threads > 1:
        blocks = np.array_split(vertices, threads * 4)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(classify_block, blocks))
        labels = np.concatenate(results)
    else:
        labels = classify_block(vertices)

    return ClassificationResult(
        Status.OK,
        labels=CommunityLabels(labels, k_found),
        k_found=k_found,
        anchors=anchors,
        diagnostics={"r": r, "r_prime": r_prime,
                     "failed_vertices": failed_count[0]},
    )


def consensus_merge(runs: list[ClassificationResult],
                    seed: int = 0) -> ClassificationResult:
    """Majority-subset consensus over repeated classifications.

    Finds the smallest disagreement radius admitting a set of more than
    half of the successful runs that pairwise agree within it, aligns that
    set's alphabets to its first member, and lets each vertex vote by a
    per-vertex derived stream.
    """
    ok_runs = [run for run in runs if run.ok and run.labels is not None]
    if not ok_runs:
        return ClassificationResult(Status.FAILED,
                                    diagnostics={"reason": "no successful runs"})
    t = len(ok_runs)
    if t > 22:
        raise ParameterError("consensus over more than 22 runs is not supported")
    pair_d = np.zeros((t, t))
    for i in range(t):
        for j in range(i + 1, t):
            pair_d[i, j] = pair_d[j, i] = disagreement(ok_runs[i].labels,
                                                       ok_runs[j].labels)
    need = t // 2 + 1
    best_mask = None
    y_dp = None
    for y in sorted(set(pair_d[np.triu_indices(t, 1)]) | {0.0}):
        compatible = pair_d <= y + 1e-15
        found = None
        for mask in range(1, 1 << t):
            members = [i for i in range(t) if mask >> i & 1]
            if len(members) < need:
                continue
            if all(compatible[i, j] for ai, i in enumerate(members)
                   for j in members[ai + 1:]):
                found = members
                break
        if found is not None:
            best_mask, y_dp = found, float(y)
            break
    kept = [ok_runs[i] for i in best_mask]

    reference = kept[0]
    k_ref = reference.labels.k
    aligned = [reference.labels]
    for run in kept[1:]:
        confusion = confusion_matrix(reference.labels, run.labels)
        mapping, _ = best_assignment(confusion)
        out = np.empty(len(run.labels), dtype=np.int64)
        for j in range(run.labels.k):
            target = int(mapping[j])
            if target < 0:
                # More classes than the reference has: fold the extras onto
                # their heaviest-overlap reference class.
                target = int(np.argmax(confusion[:, j]))
            out[run.labels.labels == j] = target
        aligned.append(CommunityLabels(out, k_ref))

    votes = derived_rng(seed, "consensus-vote").integers(0, len(aligned),
                                                         size=len(reference.labels))
    stacked = np.stack([lab.labels for lab in aligned])
    merged = stacked[votes, np.arange(len(reference.labels))]
    return ClassificationResult(
        Status.OK,
        labels=CommunityLabels(merged, k_ref),
        k_found=k_ref,
        anchors=reference.anchors,
        diagnostics={"y_doubleprime": y_dp, "kept_runs": len(kept),
                     "total_runs": len(runs)},
    )


def default_probe_count(delta: float) -> int:
    return math.ceil(math.log(4 * int(1.0 / delta)) / delta)


def agnostic_sphere_comparison(g: Graph, delta: float, m: int | None = None,
                               T: int | None = None, seed: int = 0,
                               threads: int = 1,
                               overrides: DepthOverrides | None = None) -> ClassificationResult:
    """Full parameter-free partial recovery.

    Estimates the spectrum on a 0.1 edge split, derives hyperparameters,
    runs the single-shot classifier ``T`` times and merges by consensus.
    Only ``delta``, a lower bound on the smallest community fraction, is
    required knowledge.
    """
    if not 0.0 < delta <= 1.0:
        raise ParameterError("delta must be in (0, 1]")
    if m is None:
        m = default_probe_count(delta)
    if T is None:
        T = max(1, math.ceil(math.log(max(g.n, 2))))
    try:
        eigs = improved_eigenvalue_approx(g, 0.1, derived_seed(seed, "pipeline-eigs"),
                                          threads=threads, overrides=overrides)
    except EstimationFailure as exc:
        return ClassificationResult(Status.FAILED,
                                    diagnostics={"reason": str(exc),
                                                 "stage": "eigenvalues"})
    try:
        hp = select_hyperparameters(eigs, delta, m, g.n)
    except NoFeasibleHyperparameters as exc:
        return ClassificationResult(
            Status.FAILED,
            diagnostics={"reason": str(exc), "stage": "hyperparameters",
                         "failed_inequality": exc.failed_inequality,
                         "eigen_estimate": eigs.to_json()})

    run_seeds = [derived_seed(seed, "run", t) for t in range(T)]

    def one_run(run_seed: int) -> ClassificationResult:
        return unreliable_classify(g, hp, eigs, run_seed, threads=1,
                                   overrides=overrides)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one_run, run_seeds))
    else:
        runs = [one_run(s) for s in run_seeds]

    merged = consensus_merge(runs, seed=derived_seed(seed, "consensus"))
    merged.diagnostics["hyperparams"] = hp.to_json()
    merged.diagnostics["eigen_estimate"] = eigs.to_json()
    merged.diagnostics["runs_ok"] = sum(1 for run in runs if run.ok)
    return merged
