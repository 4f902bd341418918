import numpy as np
import pytest

from agnosbm import Graph, ParameterError
from agnosbm.graphs import CommunityLabels
from agnosbm.io import read_edgelist, read_labels, write_edgelist, write_labels


def test_edgelist_round_trip(tmp_path):
    g = Graph(5, [[0, 1], [1, 2], [3, 4]])
    path = tmp_path / "g.edges"
    write_edgelist(path, g)
    back = read_edgelist(path)
    assert back.n == 5
    assert np.array_equal(back.edges, g.edges)


def test_edgelist_comments_and_blank_lines(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# header\n\n0 1\n1 2\n")
    g = read_edgelist(path)
    assert g.edge_count == 2


def test_edgelist_rejects_self_edge_with_line_number(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 1\n2 2\n")
    with pytest.raises(ParameterError, match=":2"):
        read_edgelist(path)


def test_edgelist_rejects_duplicate_with_line_number(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 1\n# fine\n1 0\n")
    with pytest.raises(ParameterError, match=":3"):
        read_edgelist(path)


def test_edgelist_rejects_garbage(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 x\n")
    with pytest.raises(ParameterError, match=":1"):
        read_edgelist(path)


def test_labels_round_trip(tmp_path):
    labels = CommunityLabels(np.array([0, 1, 1, 0, 2]), 3)
    path = tmp_path / "g.labels"
    write_labels(path, labels)
    back = read_labels(path)
    assert np.array_equal(back.labels, labels.labels)
    assert back.k == 3


def test_labels_reject_non_integer(tmp_path):
    path = tmp_path / "bad.labels"
    path.write_text("0\nfoo\n")
    with pytest.raises(ParameterError, match=":2"):
        read_labels(path)
