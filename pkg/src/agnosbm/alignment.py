"""Label alignment: confusion matrices and best-bijection matching.

Used both for scoring inferred labelings against ground truth and for
aligning repeated classifications to each other before consensus voting.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError
from .graphs import CommunityLabels

# Alphabets up to this size are matched by exhaustive permutation search;
# larger ones fall back to maximum-weight assignment.
EXACT_MATCH_LIMIT = 12


def confusion_matrix(truth: CommunityLabels, other: CommunityLabels) -> np.ndarray:
    """Overlap counts, rows indexed by truth labels, columns by the other."""
    if len(truth) != len(other):
        raise ParameterError("labelings must have equal length")
    counts = np.zeros((truth.k, other.k), dtype=np.int64)
    np.add.at(counts, (truth.labels, other.labels), 1)
    return counts


def best_assignment(confusion: np.ndarray,
                    exact_limit: int = EXACT_MATCH_LIMIT) -> tuple[np.ndarray, int]:
    """Injective column-to-row matching maximizing total overlap.

    Returns ``(mapping, matched)`` where ``mapping[j]`` is the truth row
    assigned to column ``j`` (or -1 when the column is unmatched because
    there are more columns than rows).
    """
    rows, cols = confusion.shape
    mapping = -np.ones(cols, dtype=np.int64)
    if max(rows, cols) <= exact_limit:
        best = -1
        best_perm = None
        if cols <= rows:
            for perm in permutations(range(rows), cols):
                total = sum(confusion[perm[j], j] for j in range(cols))
                if total > best:
                    best, best_perm = total, perm
            mapping[:] = best_perm
        else:
            for perm in permutations(range(cols), rows):
                total = sum(confusion[i, perm[i]] for i in range(rows))
                if total > best:
                    best, best_perm = total, perm
            for i, j in enumerate(best_perm):
                mapping[j] = i
        return mapping, int(best)
    row_idx, col_idx = linear_sum_assignment(confusion, maximize=True)
    for i, j in zip(row_idx, col_idx):
        mapping[j] = i
    matched = int(confusion[row_idx, col_idx].sum())
    return mapping, matched


def best_overlap(a: CommunityLabels, b: CommunityLabels) -> tuple[np.ndarray, int]:
    """Mapping from ``b``'s alphabet into ``a``'s maximizing agreement."""
    return best_assignment(confusion_matrix(a, b))


def relabel(labels: CommunityLabels, mapping: np.ndarray, k: int) -> CommunityLabels:
    """Apply an alphabet mapping; unmatched labels keep fresh indices."""
    out = np.empty(len(labels), dtype=np.int64)
    next_free = k
    fixed = {}
    for j, target in enumerate(mapping):
        if target >= 0:
            fixed[j] = int(target)
        else:
            fixed[j] = next_free
            next_free += 1
    for j, target in fixed.items():
        out[labels.labels == j] = target
    return CommunityLabels(out, max(next_free, k))


def disagreement(a: CommunityLabels, b: CommunityLabels,
                 exact_limit: int = 8) -> float:
    """Mismatch fraction minimized over bijections between the alphabets."""
    _, matched = best_assignment(confusion_matrix(a, b), exact_limit=exact_limit)
    return 1.0 - matched / len(a)
