"""Evaluation metrics, the real-data classifier variant, and benchmark sweeps."""

from __future__ import annotations

import csv
import io as _io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alignment import best_assignment, confusion_matrix, disagreement
from .errors import ParameterError, PipelineError
from .graphs import (CommunityLabels, Graph, Regime, SbmParams,
                     induced_subgraph, largest_component, neighborhood_shells,
                     sample_sbm)
from .profiling import agnostic_degree_profiling, finest_partition
from .rng import derived_rng, derived_seed
from .spectral import exact_spectrum, improved_eigenvalue_approx
from .sphere import (ClassificationResult, Status, agnostic_sphere_comparison)


@dataclass(frozen=True)
class AgreementReport:
    """Accuracy of a labeling against ground truth, maximized over
    relabellings of the inferred alphabet."""

    accuracy: float
    best_bijection: tuple[int, ...]
    confusion: np.ndarray

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "best_bijection": list(self.best_bijection),
            "confusion": self.confusion.tolist(),
        }


def agreement(truth: CommunityLabels, inferred: CommunityLabels) -> AgreementReport:
    """Fraction of correctly labelled vertices under the best injective
    relabelling of the inferred alphabet into the truth alphabet."""
    if len(truth) != len(inferred):
        raise ParameterError("labelings must have equal length")
    confusion = confusion_matrix(truth, inferred)
    mapping, matched = best_assignment(confusion)
    return AgreementReport(accuracy=matched / len(truth),
                           best_bijection=tuple(int(x) for x in mapping),
                           confusion=confusion)


def _boundary_edges(g: Graph, v: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Directed edges leaving the radius-``r`` ball around ``v``.

    A directed edge (tail, head) leaves the ball when the tail is at
    distance <= r and the head outside.  Returns (tails, heads).
    """
    shells = neighborhood_shells(g, v, r)
    ball = np.concatenate(shells)
    in_ball = np.zeros(g.n, dtype=bool)
    in_ball[ball] = True
    tails_all = np.repeat(ball, g.indptr[ball + 1] - g.indptr[ball])
    heads_all = np.concatenate([g.neighbors(int(u)) for u in ball]) if ball.size \
        else np.empty(0, dtype=np.int64)
    outside = ~in_ball[heads_all]
    return tails_all[outside], heads_all[outside]


def normalized_pair_fraction(g: Graph, v: int, v_prime: int, r: int,
                             r_prime: int) -> float:
    """Fraction of boundary-edge pairs of the two balls landing on a common
    vertex via distinct edges.

    Pairs are ordered (one edge leaving each ball); a pair using the same
    undirected edge twice does not count.  Returns 0 when either boundary
    is empty.
    """
    if v == v_prime:
        import warnings

        warnings.warn("normalized pair fraction with identical endpoints",
                      stacklevel=2)
    tails_a, heads_a = _boundary_edges(g, v, r)
    tails_b, heads_b = _boundary_edges(g, v_prime, r_prime)
    if heads_a.size == 0 or heads_b.size == 0:
        return 0.0
    count_a = np.bincount(heads_a, minlength=g.n)
    count_b = np.bincount(heads_b, minlength=g.n)
    coincident = int((count_a * count_b).sum())
    # Subtract pairs formed by one directed edge shared by both boundaries:
    # identical (tail, head) entries are the only same-edge coincidences.
    codes_a = tails_a * g.n + heads_a
    codes_b = tails_b * g.n + heads_b
    shared = np.intersect1d(codes_a, codes_b).size
    total = heads_a.size * heads_b.size
    return (coincident - shared) / total


@dataclass
class RealDataResult:
    """Per-trial classifications plus their consensus."""

    consensus: ClassificationResult
    trials: list[ClassificationResult]


def _avg_pair_fraction(g: Graph, r: int, r_prime: int, rng,
                       samples: int = 2000) -> float:
    total, used = 0.0, 0
    for _ in range(samples):
        v, w = rng.integers(0, g.n, size=2)
        if v == w:
            continue
        total += normalized_pair_fraction(g, int(v), int(w), r, r_prime)
        used += 1
    if used == 0:
        raise PipelineError("could not sample vertex pairs", stage="realdata")
    return total / used


def realdata_two_community(g: Graph, r: int = 1, r_prime: int = 1,
                           trials: int = 40, seed: int = 0,
                           threads: int = 1) -> RealDataResult:
    """Two-community classification by normalized boundary coincidences.

    Works on the largest component.  Each trial estimates the global
    average coincidence fraction from sampled pairs, hunts for a reference
    pair judged different with above-average degrees, then assigns every
    vertex to the reference with the larger coincidence fraction.  Trials
    that exhaust the reference-search budget fail individually; the
    consensus is a majority vote over aligned successful trials.
    """
    comp = largest_component(g)
    sub, original_ids = induced_subgraph(g, comp)
    n = sub.n
    degrees = sub.degrees()
    avg_degree = degrees.mean() if n else 0.0

    def run_trial(t: int) -> ClassificationResult:
        rng = derived_rng(seed, "realdata-trial", t)
        average = _avg_pair_fraction(sub, r, r_prime, rng)
        budget = 10 * n
        refs = None
        for _ in range(budget):
            a, b = rng.integers(0, n, size=2)
            if a == b:
                continue
            if degrees[a] <= avg_degree or degrees[b] <= avg_degree:
                continue
            if normalized_pair_fraction(sub, int(a), int(b), r, r_prime) < average:
                refs = (int(a), int(b))
                break
        if refs is None:
            return ClassificationResult(Status.FAILED,
                                        diagnostics={"reason": "no reference pair found",
                                                     "trial": t})
        labels = np.empty(n, dtype=np.int64)
        for v in range(n):
            if v == refs[0]:
                labels[v] = 0
                continue
            if v == refs[1]:
                labels[v] = 1
                continue
            s0 = normalized_pair_fraction(sub, v, refs[0], r, r_prime)
            s1 = normalized_pair_fraction(sub, v, refs[1], r, r_prime)
            labels[v] = 0 if s0 >= s1 else 1
        return ClassificationResult(Status.OK,
                                    labels=CommunityLabels(labels, 2), k_found=2,
                                    anchors=list(refs),
                                    diagnostics={"average": average, "trial": t})

    indices = list(range(trials))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_trial, indices))
    else:
        results = [run_trial(t) for t in indices]

    ok = [res for res in results if res.ok]
    if not ok:
        consensus = ClassificationResult(Status.FAILED,
                                         diagnostics={"reason": "no successful trials"})
        return RealDataResult(consensus=consensus, trials=results)

    reference = ok[0].labels
    aligned = [reference.labels]
    for res in ok[1:]:
        confusion = confusion_matrix(reference, res.labels)
        mapping, _ = best_assignment(confusion)
        out = np.empty(n, dtype=np.int64)
        for j in range(res.labels.k):
            target = int(mapping[j])
            if target < 0:
                target = int(np.argmax(confusion[:, j]))
            out[res.labels.labels == j] = target
        aligned.append(out)
    stacked = np.stack(aligned)
    votes = np.zeros(n, dtype=np.int64)
    for v in range(n):
        votes[v] = np.argmax(np.bincount(stacked[:, v], minlength=2))

    full = np.zeros(g.n, dtype=np.int64)
    full[original_ids] = votes
    consensus = ClassificationResult(
        Status.OK, labels=CommunityLabels(full, 2), k_found=2,
        anchors=ok[0].anchors,
        diagnostics={"trials_ok": len(ok), "trials": trials,
                     "main_component_size": n,
                     "main_component": original_ids.tolist()})
    return RealDataResult(consensus=consensus, trials=results)


@dataclass
class SweepConfig:
    """Grid specification for a benchmark sweep."""

    ns: list[int]
    scales: list[float]
    Q: list[list[float]]
    p: list[float]
    seeds: list[int]
    pipeline: str = "partial"  # partial | exact | eigs
    regime: str = "constant"
    delta: float = 0.25
    output: str | None = None

    def __post_init__(self):
        if not self.ns or not self.scales:
            raise ParameterError("sweep grid must be nonempty")
        if not self.seeds:
            raise ParameterError("sweep needs at least one seed")
        if self.pipeline not in ("partial", "exact", "eigs"):
            raise ParameterError(f"unknown pipeline {self.pipeline!r}")
        if self.regime not in ("constant", "logarithmic"):
            raise ParameterError(f"unknown regime {self.regime!r}")

    @classmethod
    def from_json(cls, payload: dict) -> "SweepConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(payload) - known
        if extra:
            raise ParameterError(f"unknown sweep config fields: {sorted(extra)}")
        return cls(**payload)


SWEEP_COLUMNS = ["kind", "pipeline", "regime", "n", "scale", "seed", "status",
                 "accuracy", "eig_error", "h_est", "k_found", "runtime_s"]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(round(value, 10))
    return str(value)


def _run_cell(cfg: SweepConfig, n: int, scale: float, seed: int) -> dict:
    params = SbmParams(p=np.array(cfg.p), Q=np.array(cfg.Q),
                       regime=Regime(cfg.regime), scale=scale)
    row = {"kind": "data", "pipeline": cfg.pipeline, "regime": cfg.regime,
           "n": n, "scale": scale, "seed": seed, "status": "ok",
           "accuracy": None, "eig_error": None, "h_est": None,
           "k_found": None, "runtime_s": None}
    started = time.perf_counter()
    try:
        g, truth = sample_sbm(params, n, derived_seed(seed, "sweep-sample"))
        if cfg.pipeline == "eigs":
            est = improved_eigenvalue_approx(g, 0.1, derived_seed(seed, "sweep-eigs"))
            spectrum = exact_spectrum(params)
            row["h_est"] = est.h
            lams = spectrum.lambdas[np.abs(spectrum.lambdas) > 1e-12]
            shared = min(est.h, lams.size)
            if shared and est.h == lams.size:
                rel = np.abs(np.array(est.values[:shared]) - lams[:shared]) / np.abs(lams[:shared])
                row["eig_error"] = float(rel.max())
        elif cfg.pipeline == "partial":
            res = agnostic_sphere_comparison(g, cfg.delta, seed=derived_seed(seed, "sweep-partial"))
            row["status"] = res.status.value
            row["k_found"] = res.k_found if res.ok else None
            if res.ok:
                row["accuracy"] = agreement(truth, res.labels).accuracy
        else:
            res = agnostic_degree_profiling(g, seed=derived_seed(seed, "sweep-exact"),
                                            delta_for_partial=cfg.delta)
            row["k_found"] = len(res.divergence.finest)
            row["accuracy"] = agreement(truth, res.group_labels).accuracy
    except (PipelineError, ParameterError) as exc:
        row["status"] = f"error:{type(exc).__name__}"
    row["runtime_s"] = time.perf_counter() - started
    return row


def run_sweep(cfg: SweepConfig, threads: int = 1) -> list[dict]:
    """All (cell, seed) rows of the grid plus one median-aggregate row per
    cell.  Per-cell failures are recorded in their rows, never abort the
    sweep.  Rows are ordered by (n, scale, seed) regardless of threads."""
    cells = [(n, scale, seed) for n in cfg.ns for scale in cfg.scales
             for seed in cfg.seeds]

    def work(cell):
        n, scale, seed = cell
        return _run_cell(cfg, n, scale, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, cells))
    else:
        rows = [work(cell) for cell in cells]

    out: list[dict] = []
    position = 0
    for n in cfg.ns:
        for scale in cfg.scales:
            cell_rows = rows[position:position + len(cfg.seeds)]
            position += len(cfg.seeds)
            out.extend(cell_rows)
            agg = {"kind": "aggregate", "pipeline": cfg.pipeline,
                   "regime": cfg.regime, "n": n, "scale": scale, "seed": "",
                   "status": f"ok:{sum(1 for r in cell_rows if r['status'] == 'ok')}/{len(cell_rows)}",
                   "accuracy": None, "eig_error": None, "h_est": None,
                   "k_found": None, "runtime_s": None}
            for column in ("accuracy", "eig_error", "runtime_s"):
                values = [r[column] for r in cell_rows if r[column] is not None]
                if values:
                    agg[column] = float(np.median(values))
            out.append(agg)
    return out


def rows_to_csv(rows: list[dict]) -> str:
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in SWEEP_COLUMNS])
    return buffer.getvalue()
