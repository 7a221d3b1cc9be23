# -*- coding: utf-8 -*-
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.graph_util import Graph  # noqa: E402


def make_graph(num_nodes, edges, directed=False, weights=None):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(num_nodes, edges[:, 0], edges[:, 1], weights, directed=directed)


def random_graph(num_nodes, p, rng):
    iu, ju = np.triu_indices(num_nodes, k=1)
    keep = rng.random(len(iu)) < p
    return make_graph(num_nodes, np.stack([iu[keep], ju[keep]], axis=1))


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path4():
    return make_graph(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def star3():
    return make_graph(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def write_file(tmp_path):
    def _write(name, text, encoding='utf8'):
        path = tmp_path / name
        path.write_bytes(text.encode(encoding))
        return str(path)
    return _write
