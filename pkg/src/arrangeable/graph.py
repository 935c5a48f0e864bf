"""Core graph type, deterministic generators and file IO.

Vertices are ``0..n-1`` inside the library.  Files and JSON reports use
``1..n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import GraphFormatError, PreconditionError

__all__ = [
    "Graph",
    "Labelling",
    "IntegerPartitionGrid",
    "load_graph",
    "save_graph",
    "generate",
    "path_power",
    "cycle_power",
    "complete",
    "empty",
    "random_min_degree",
    "random_bandwidth",
    "is_proper_colouring",
    "equitable_grid",
]


class Graph:
    """Undirected simple graph backed by a dense boolean adjacency matrix.

    The matrix is copied on construction and frozen, so a ``Graph`` can be
    shared freely.  Use :meth:`from_edges` to build one from an edge list.
    """

    def __init__(self, adjacency, names: Sequence[str] | None = None):
        adj = np.array(adjacency, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        adj.flags.writeable = False
        self._adj = adj
        if names is not None and len(names) != adj.shape[0]:
            raise ValueError("names must have one entry per vertex")
        self.names = None if names is None else list(names)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], names=None) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if len(e):
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            if (e[:, 0] == e[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            adj[e[:, 0], e[:, 1]] = True
            adj[e[:, 1], e[:, 0]] = True
        return cls(adj, names)

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adj(self) -> np.ndarray:
        """Read-only boolean adjacency matrix."""
        return self._adj

    @cached_property
    def degrees(self) -> np.ndarray:
        return self._adj.sum(axis=1)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(self._adj, dtype=np.int32)

    @cached_property
    def _neighbour_lists(self) -> list[np.ndarray]:
        csr = self.csr
        return [csr.indices[csr.indptr[v]:csr.indptr[v + 1]] for v in range(self.n)]

    def neighbours(self, v: int) -> np.ndarray:
        return self._neighbour_lists[v]

    @cached_property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges ``u < v`` in lexicographic order."""
        u, v = np.nonzero(np.triu(self._adj, 1))
        return np.stack([u, v], axis=1)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min()) if self.n else 0

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u, v])

    def subgraph(self, vertices) -> "Graph":
        vs = np.asarray(vertices, dtype=np.int64)
        return Graph(self._adj[np.ix_(vs, vs)])

    def relabel(self, order) -> "Graph":
        """Graph whose vertex ``p`` is ``order[p]`` of this graph."""
        order = np.asarray(order, dtype=np.int64)
        return Graph(self._adj[np.ix_(order, order)])

    def complement(self) -> "Graph":
        comp = ~self._adj
        np.fill_diagonal(comp, False)
        return Graph(comp)

    def with_edges(self, edges) -> "Graph":
        adj = self._adj.copy()
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if len(e):
            adj[e[:, 0], e[:, 1]] = True
            adj[e[:, 1], e[:, 0]] = True
        return Graph(adj)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash((self.n, self._adj.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


@dataclass(frozen=True)
class Labelling:
    """Bijection between vertices and positions ``0..n-1``.

    ``order[p]`` is the vertex at position ``p``; ``position[v]`` inverts it.
    The same type carries bandwidth labellings and arrangeable orderings.
    """

    order: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        n = len(order)
        if not np.array_equal(np.sort(order), np.arange(n)):
            raise ValueError("labelling is not a bijection onto 0..n-1")
        order.flags.writeable = False
        object.__setattr__(self, "order", order)

    @classmethod
    def identity(cls, n: int) -> "Labelling":
        return cls(np.arange(n))

    @classmethod
    def from_positions(cls, position) -> "Labelling":
        position = np.asarray(position, dtype=np.int64)
        order = np.empty_like(position)
        order[position] = np.arange(len(position))
        return cls(order)

    @cached_property
    def position(self) -> np.ndarray:
        pos = np.empty_like(self.order)
        pos[self.order] = np.arange(len(self.order))
        return pos

    def __len__(self) -> int:
        return len(self.order)

    def to_json(self) -> list[int]:
        return [int(v) + 1 for v in self.order]


@dataclass
class IntegerPartitionGrid:
    """Grid ``m[i, j]`` of nonnegative integers, ``i`` over columns, ``j`` over colours."""

    m: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.int64)
        if self.m.ndim != 2 or (self.m < 0).any():
            raise ValueError("grid must be a 2-d array of nonnegative integers")

    @property
    def k(self) -> int:
        return self.m.shape[0]

    @property
    def r(self) -> int:
        return self.m.shape[1]

    @property
    def total(self) -> int:
        return int(self.m.sum())

    def is_equitable(self) -> bool:
        return bool((self.m.max(axis=1) - self.m.min(axis=1) <= 1).all())

    def flat(self) -> np.ndarray:
        return self.m.reshape(-1)


def equitable_grid(n: int, k: int, r: int) -> IntegerPartitionGrid:
    """Split ``n`` into ``k*r`` parts of size floor or ceil, ascending in (i, j) order."""
    parts = k * r
    base, extra = divmod(n, parts)
    flat = np.full(parts, base, dtype=np.int64)
    if extra:
        flat[parts - extra:] += 1
    return IntegerPartitionGrid(flat.reshape(k, r))


# --------------------------------------------------------------------------
# IO


def _parse_edge_list(text: str) -> tuple[int, list[tuple[int, int]]]:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "n":
            if n is not None or edges or len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: misplaced or malformed header")
            try:
                n = int(parts[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad vertex count {parts[1]!r}") from None
            if n < 0:
                raise GraphFormatError(f"line {lineno}: negative vertex count")
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer vertex id in {line!r}") from None
        if u < 1 or v < 1:
            raise GraphFormatError(f"line {lineno}: vertex ids are 1-based")
        if n is not None and (u > n or v > n):
            raise GraphFormatError(f"line {lineno}: vertex id exceeds n={n}")
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop at vertex {u}")
        edges.append((u, v))
    if n is None:
        n = max((max(e) for e in edges), default=0)
    return n, edges


def _parse_adjacency_json(text: str) -> tuple[int, list[tuple[int, int]]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict) or "n" not in data or "edges" not in data:
        raise GraphFormatError("adjacency-json needs fields 'n' and 'edges'")
    n = data["n"]
    if not isinstance(n, int) or n < 0:
        raise GraphFormatError("field 'n' must be a nonnegative integer")
    edges = []
    for idx, e in enumerate(data["edges"]):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)):
            raise GraphFormatError(f"edge {idx}: expected a 2-array of integers")
        u, v = e
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphFormatError(f"edge {idx}: vertex id out of range 1..{n}")
        if u == v:
            raise GraphFormatError(f"edge {idx}: self-loop at vertex {u}")
        edges.append((u, v))
    return n, edges


def load_graph(path, format: str = "edge-list") -> Graph:
    """Read a graph from ``path``.

    ``format`` is ``"edge-list"`` (optional ``n <count>`` header, then one
    1-based ``u v`` pair per line) or ``"adjacency-json"`` (``{"n": .., "edges":
    [[u, v], ...]}``).  Duplicate and reversed edges collapse to one edge.
    """
    text = Path(path).read_text()
    if format == "edge-list":
        n, edges = _parse_edge_list(text)
    elif format == "adjacency-json":
        n, edges = _parse_adjacency_json(text)
    else:
        raise ValueError(f"unknown graph format {format!r}")
    return Graph.from_edges(n, [(u - 1, v - 1) for u, v in edges])


def dumps_edge_list(G: Graph) -> str:
    lines = [f"n {G.n}"]
    lines += [f"{u + 1} {v + 1}" for u, v in G.edges]
    return "\n".join(lines) + "\n"


def save_graph(G: Graph, path, format: str = "edge-list") -> None:
    if format == "edge-list":
        text = dumps_edge_list(G)
    elif format == "adjacency-json":
        text = json.dumps({"n": G.n, "edges": [[int(u) + 1, int(v) + 1] for u, v in G.edges]})
    else:
        raise ValueError(f"unknown graph format {format!r}")
    Path(path).write_text(text)


# --------------------------------------------------------------------------
# generators


def empty(n: int) -> Graph:
    return Graph(np.zeros((n, n), dtype=bool))


def complete(n: int) -> Graph:
    if n < 1:
        raise PreconditionError("complete graph needs n >= 1")
    adj = np.ones((n, n), dtype=bool)
    np.fill_diagonal(adj, False)
    return Graph(adj)


def path_power(n: int, r: int) -> Graph:
    """``P_n^r``: vertices ``0..n-1``, edges between labels at distance at most ``r``."""
    if n < 1 or r < 1:
        raise PreconditionError("path power needs n >= 1 and r >= 1")
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    return Graph((dist >= 1) & (dist <= r))


def cycle_power(m: int, r: int) -> Graph:
    """``C_m^r``: edges between vertices at cyclic distance at most ``r``."""
    if m < 3 or r < 1:
        raise PreconditionError("cycle power needs m >= 3 and r >= 1")
    idx = np.arange(m)
    d = np.abs(idx[:, None] - idx[None, :])
    d = np.minimum(d, m - d)
    return Graph((d >= 1) & (d <= r))


def random_min_degree(n: int, delta_fraction: float, seed) -> Graph:
    """Random graph with minimum degree at least ``ceil(delta_fraction * n)``.

    Starts from ``G(n, delta_fraction)`` and tops up every deficient vertex
    with uniformly chosen extra neighbours until the bound holds.
    """
    if n < 1 or not 0 <= delta_fraction < 1:
        raise PreconditionError("need n >= 1 and 0 <= delta_fraction < 1")
    target = math.ceil(delta_fraction * n - 1e-9)
    if target > n - 1:
        raise PreconditionError(f"minimum degree {target} impossible on {n} vertices")
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < delta_fraction, 1)
    adj = upper | upper.T
    for v in rng.permutation(n):
        deficit = target - int(adj[v].sum())
        if deficit <= 0:
            continue
        pool = np.flatnonzero(~adj[v])
        pool = pool[pool != v]
        extra = rng.choice(pool, size=deficit, replace=False)
        adj[v, extra] = True
        adj[extra, v] = True
    return Graph(adj)


def random_bandwidth(n: int, b: int, p: float, seed) -> Graph:
    """Each pair at label distance ``1..b`` becomes an edge with probability ``p``."""
    if n < 1 or b < 1 or not 0 <= p <= 1:
        raise PreconditionError("need n >= 1, b >= 1, 0 <= p <= 1")
    if b >= n:
        raise PreconditionError("bandwidth must be smaller than n")
    rng = np.random.default_rng(seed)
    idx = np.arange(n)
    dist = idx[None, :] - idx[:, None]
    upper = (dist >= 1) & (dist <= b) & (rng.random((n, n)) < p)
    return Graph(upper | upper.T)


_GENERATORS = {
    "path-power": path_power,
    "cycle-power": cycle_power,
    "complete": complete,
    "random-min-degree": random_min_degree,
    "random-bandwidth": random_bandwidth,
}


def generate(kind: str, *args, **kwargs) -> Graph:
    """Dispatch to a named generator, e.g. ``generate("path-power", 10, 2)``."""
    try:
        fn = _GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown generator {kind!r}; choose from {sorted(_GENERATORS)}") from None
    return fn(*args, **kwargs)


def is_proper_colouring(G: Graph, sigma) -> bool:
    """True iff no edge has equal colours at both ends (colour 0 included)."""
    sigma = np.asarray(sigma)
    if len(sigma) != G.n:
        raise ValueError("colouring must assign a colour to every vertex")
    e = G.edges
    return bool((sigma[e[:, 0]] != sigma[e[:, 1]]).all())
