"""Edge-list and label file formats.

Edge lists are ASCII, one edge per line as two 0-based decimal vertex
indices separated by whitespace; lines starting with ``#`` are ignored.
Label files carry one integer per line, line ``i`` labelling vertex ``i``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .graphs import CommunityLabels, Graph


def read_edgelist(path, n: int | None = None) -> Graph:
    """Parse an edge-list file; rejects malformed lines, self edges and
    duplicates with the offending line number."""
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    max_vertex = -1
    with open(path, "r", encoding="utf8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParameterError(f"{path}:{lineno}: expected two vertex indices")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParameterError(f"{path}:{lineno}: non-integer vertex index") from None
            if u < 0 or v < 0:
                raise ParameterError(f"{path}:{lineno}: negative vertex index")
            if u == v:
                raise ParameterError(f"{path}:{lineno}: self edge ({u}, {v})")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ParameterError(f"{path}:{lineno}: duplicate edge ({u}, {v})")
            seen.add(key)
            edges.append(key)
            max_vertex = max(max_vertex, u, v)
    count = max_vertex + 1 if n is None else n
    if count < 1:
        raise ParameterError(f"{path}: no vertices")
    arr = np.array(edges, dtype=np.int64) if edges else np.empty((0, 2), dtype=np.int64)
    return Graph(count, arr)


def write_edgelist(path, g: Graph) -> None:
    with open(path, "w", encoding="utf8") as fh:
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def read_labels(path, k: int | None = None) -> CommunityLabels:
    values: list[int] = []
    with open(path, "r", encoding="utf8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise ParameterError(f"{path}:{lineno}: non-integer label") from None
    if not values:
        raise ParameterError(f"{path}: empty labels file")
    arr = np.array(values, dtype=np.int64)
    if arr.min() < 0:
        raise ParameterError(f"{path}: negative label")
    alphabet = int(arr.max()) + 1 if k is None else k
    return CommunityLabels(arr, alphabet)


def write_labels(path, labels: CommunityLabels) -> None:
    with open(path, "w", encoding="utf8") as fh:
        for value in labels.labels:
            fh.write(f"{value}\n")


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf8"))
