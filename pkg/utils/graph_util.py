# -*- coding: utf-8 -*-
"""
Sparse graph storage and queries.

Node ids are dense integers 0..N-1 assigned in first-seen order; the original
string token of every node is kept in `Graph.node_tokens`.
"""
import math
import re
from collections import namedtuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from utils.error_util import ParseError, ValidationError
from utils.other_utils import logger, read_text_lines

Subgraph = namedtuple('Subgraph', ['graph', 'node_ids'])


class Graph(object):
    """Immutable CSR graph. Undirected graphs store every edge in both directions."""

    def __init__(self, num_nodes, indptr, indices, edge_weights=None, directed=False, node_tokens=None):
        self.num_nodes = int(num_nodes)
        self.directed = bool(directed)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.edge_weights = None if edge_weights is None else np.asarray(edge_weights, dtype=np.float64)
        if node_tokens is None:
            node_tokens = [str(i) for i in range(self.num_nodes)]
        self.node_tokens = list(node_tokens)

        if len(self.indptr) != self.num_nodes + 1 or len(self.node_tokens) != self.num_nodes:
            raise ValidationError('graph arrays do not match num_nodes')
        if self.edge_weights is not None:
            if len(self.edge_weights) != len(self.indices):
                raise ValidationError('edge_weights must hold one value per stored arc')
            if np.any(self.edge_weights <= 0):
                raise ValidationError('edge weights must be > 0')

        for arr in (self.indptr, self.indices):
            arr.setflags(write=False)
        if self.edge_weights is not None:
            self.edge_weights.setflags(write=False)

        # sorted row-major keys u*N+v for vectorized membership tests
        rows = np.repeat(np.arange(self.num_nodes, dtype=np.int64), np.diff(self.indptr))
        self._arc_keys = rows * self.num_nodes + self.indices
        self._arc_keys.setflags(write=False)
        self._token_index = None

    @classmethod
    def from_edges(cls, num_nodes, src, dst, weights=None, directed=False, node_tokens=None):
        """Build a graph from arc arrays. Self-loops are dropped, duplicates collapsed with summed weights."""
        src = np.asarray(src, dtype=np.int64).reshape(-1)
        dst = np.asarray(dst, dtype=np.int64).reshape(-1)
        if len(src) != len(dst):
            raise ValidationError('src and dst must have the same length')
        if len(src) and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= num_nodes):
            raise IndexError(f'edge endpoint out of range for a graph with {num_nodes} nodes')
        has_weights = weights is not None
        weights = np.ones(len(src)) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(weights) != len(src):
            raise ValidationError('weights must have one value per edge')
        if np.any(weights <= 0):
            raise ValidationError('edge weights must be > 0')

        loops = src == dst
        if loops.any():
            logger.warning(f'Dropped {int(loops.sum())} self-loop(s)')
            src, dst, weights = src[~loops], dst[~loops], weights[~loops]

        if not directed:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
            weights = np.concatenate([weights, weights])

        adj = sparse.coo_matrix((weights, (src, dst)), shape=(num_nodes, num_nodes)).tocsr()
        adj.sum_duplicates()
        adj.sort_indices()
        data = adj.data
        if not has_weights and np.all(data == 1.0):
            data = None
        return cls(num_nodes, adj.indptr, adj.indices, data, directed=directed, node_tokens=node_tokens)

    @property
    def num_arcs(self):
        return len(self.indices)

    @property
    def num_edges(self):
        return self.num_arcs if self.directed else self.num_arcs // 2

    def check_node(self, v):
        if not 0 <= int(v) < self.num_nodes:
            raise IndexError(f'node id {v} out of range [0, {self.num_nodes})')
        return int(v)

    def neighbors(self, v):
        v = self.check_node(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u, v):
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)

    def has_edges(self, src, dst):
        """Vectorized membership of arcs (src[i], dst[i])."""
        keys = np.asarray(src, dtype=np.int64) * self.num_nodes + np.asarray(dst, dtype=np.int64)
        if len(self._arc_keys) == 0:
            return np.zeros(keys.shape, dtype=bool)
        pos = np.searchsorted(self._arc_keys, keys)
        pos = np.minimum(pos, len(self._arc_keys) - 1)
        return self._arc_keys[pos] == keys

    def edge_pairs(self):
        """Return an (E, 2) array: every arc for directed graphs, each edge once as u < v otherwise."""
        rows = np.repeat(np.arange(self.num_nodes, dtype=np.int64), np.diff(self.indptr))
        pairs = np.stack([rows, self.indices], axis=1)
        if not self.directed:
            pairs = pairs[pairs[:, 0] < pairs[:, 1]]
        return pairs

    def pair_weights(self, pairs):
        """Weights of the given existing arcs; 1.0 everywhere for unweighted graphs."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if self.edge_weights is None:
            return np.ones(len(pairs))
        keys = pairs[:, 0] * self.num_nodes + pairs[:, 1]
        pos = np.searchsorted(self._arc_keys, keys)
        return self.edge_weights[pos]

    def adjacency(self, weighted=False):
        data = self.edge_weights if (weighted and self.edge_weights is not None) else np.ones(self.num_arcs)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.num_nodes, self.num_nodes))

    def token_to_id(self, token):
        if self._token_index is None:
            self._token_index = {t: i for i, t in enumerate(self.node_tokens)}
        return self._token_index[token]

    def __repr__(self):
        kind = 'directed' if self.directed else 'undirected'
        return f'Graph({kind}, num_nodes={self.num_nodes}, num_edges={self.num_edges})'


class NodeFeatures(object):

    def __init__(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError(f'node features must be a 2-D matrix, got shape {values.shape}')
        if not np.all(np.isfinite(values)):
            raise ValidationError('node features must be finite')
        self.values = values
        self.values.setflags(write=False)

    @property
    def dim(self):
        return self.values.shape[1]

    def __len__(self):
        return self.values.shape[0]


def parse_edge_lines(lines, path=None):
    """Yield (line_no, src_token, dst_token, weight) from `src dst [weight]` lines."""
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        fields = re.split(r'\s+', line)
        if len(fields) not in (2, 3):
            raise ParseError(f'expected "src dst [weight]", got {len(fields)} field(s)', path, line_no)
        weight = 1.0
        if len(fields) == 3:
            try:
                weight = float(fields[2])
            except ValueError:
                raise ParseError(f'non-numeric weight [{fields[2]}]', path, line_no)
            if not math.isfinite(weight) or weight <= 0:
                raise ValidationError(f'{path or "<input>"}:{line_no}: edge weight must be > 0, got {fields[2]}')
        yield line_no, fields[0], fields[1], weight


def load_edge_list(path, directed=False):
    token_index = {}
    src, dst, weights = [], [], []
    has_weights = False
    for _, a, b, w in parse_edge_lines(read_text_lines(path), path):
        for token in (a, b):
            if token not in token_index:
                token_index[token] = len(token_index)
        src.append(token_index[a])
        dst.append(token_index[b])
        weights.append(w)
        has_weights = has_weights or w != 1.0

    tokens = list(token_index)
    graph = Graph.from_edges(len(tokens), src, dst, weights if weights else None,
                             directed=directed, node_tokens=tokens)
    if graph.edge_weights is not None and not has_weights and np.all(graph.edge_weights == 1.0):
        graph = Graph(graph.num_nodes, graph.indptr, graph.indices, None, directed, tokens)
    logger.info(f'Loaded {graph} from [{path}]')
    return graph


def load_features(path, graph):
    """Read `token v1 ... vdim` lines; nodes absent from the file get zero rows."""
    rows = {}
    dim = None
    unknown = 0
    for line_no, line in enumerate(read_text_lines(path), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        fields = re.split(r'\s+', line)
        if len(fields) < 2:
            raise ParseError('feature line needs a token and at least one value', path, line_no)
        if dim is None:
            dim = len(fields) - 1
        elif len(fields) - 1 != dim:
            raise ParseError(f'expected {dim} values, got {len(fields) - 1}', path, line_no)
        try:
            values = [float(x) for x in fields[1:]]
        except ValueError:
            raise ParseError('non-numeric feature value', path, line_no)
        try:
            rows[graph.token_to_id(fields[0])] = values
        except KeyError:
            unknown += 1

    if dim is None:
        raise ParseError('feature file holds no rows', path)
    if unknown:
        logger.warning(f'Ignored {unknown} feature row(s) for tokens not in the graph')
    missing = graph.num_nodes - len(rows)
    if missing:
        logger.warning(f'{missing} node(s) have no features in [{path}], using zero vectors')

    values = np.zeros((graph.num_nodes, dim))
    for v, row in rows.items():
        values[v] = row
    return NodeFeatures(values)


def degrees(g):
    return np.diff(g.indptr)


def neighborhood(g, v, h):
    """Nodes within h hops of v, v included."""
    v = g.check_node(v)
    if h < 0:
        raise ValidationError(f'hop count must be >= 0, got {h}')
    visited = np.zeros(g.num_nodes, dtype=bool)
    visited[v] = True
    frontier = np.array([v], dtype=np.int64)
    for _ in range(h):
        if not len(frontier):
            break
        nxt = np.concatenate([g.indices[g.indptr[u]:g.indptr[u + 1]] for u in frontier])
        nxt = np.unique(nxt[~visited[nxt]])
        visited[nxt] = True
        frontier = nxt
    return set(np.flatnonzero(visited).tolist())


def distance(g, u, v):
    """Hop distance from u to v following arcs; math.inf when v is unreachable."""
    u, v = g.check_node(u), g.check_node(v)
    if u == v:
        return 0
    dist = csgraph.shortest_path(g.adjacency(), directed=g.directed, unweighted=True, indices=u)
    d = dist[v]
    return math.inf if np.isinf(d) else int(d)


def induced_subgraph(g, nodes):
    nodes = np.asarray(sorted(nodes), dtype=np.int64)
    sub = g.adjacency(weighted=True)[nodes][:, nodes].tocsr()
    sub.sort_indices()
    weights = sub.data if g.edge_weights is not None else None
    tokens = [g.node_tokens[i] for i in nodes]
    return Subgraph(Graph(len(nodes), sub.indptr, sub.indices, weights, g.directed, tokens), nodes)


def pair_subgraph(g, u, v, h):
    """Induced subgraph over the union of the h-hop neighborhoods of u and v."""
    u, v = g.check_node(u), g.check_node(v)
    if u == v:
        raise ValidationError('pair_subgraph needs two distinct nodes')
    return induced_subgraph(g, neighborhood(g, u, h) | neighborhood(g, v, h))


def random_walk(g, start, length, rng):
    """Uniform random walk of `length` steps from `start` (start itself excluded); stops at dead ends."""
    start = g.check_node(start)
    if length < 1:
        raise ValidationError(f'walk length must be >= 1, got {length}')
    walk = []
    cur = start
    for _ in range(length):
        lo, hi = g.indptr[cur], g.indptr[cur + 1]
        if lo == hi:
            break
        cur = int(g.indices[lo + rng.integers(hi - lo)])
        walk.append(cur)
    return walk
