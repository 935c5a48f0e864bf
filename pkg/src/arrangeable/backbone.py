"""Template graphs on the grid ``[k] x [r]`` and surface constants.

Grid vertex ``(i, j)`` (0-based) is stored as index ``i * r + j``.  Reports
and edge lists print it 1-based as ``(i+1, j+1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .graph import Graph, cycle_power, path_power

__all__ = [
    "GridGraph",
    "build_Bkr",
    "build_Kkr",
    "build_Rkr_path_augmented",
    "covering_vertices",
    "augment_reduced_graph",
    "SurfaceConstants",
    "surface_constants",
    "build_Pmr",
    "build_Cmr",
]


@dataclass(frozen=True)
class GridGraph:
    """A graph on ``[k] x [r]`` with vertex ``(i, j)`` at index ``i * r + j``."""

    k: int
    r: int
    graph: Graph
    info: dict = field(default_factory=dict, compare=False)

    def index(self, i: int, j: int) -> int:
        return i * self.r + j

    def cell(self, v: int) -> tuple[int, int]:
        return divmod(int(v), self.r)

    @property
    def adj(self) -> np.ndarray:
        return self.graph.adj

    def has_edge(self, a: tuple[int, int], b: tuple[int, int]) -> bool:
        return self.graph.has_edge(self.index(*a), self.index(*b))

    def contains(self, other: "GridGraph") -> bool:
        """Edge-set containment ``other ⊆ self`` on the same grid."""
        return (self.k, self.r) == (other.k, other.r) and bool((~self.adj & other.adj).sum() == 0)

    def edge_list(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        return [(self.cell(u), self.cell(v)) for u, v in self.graph.edges]

    def dumps(self) -> str:
        """Edge list with 1-based ``i,j`` vertex names."""
        lines = [f"# grid k={self.k} r={self.r}", f"n {self.k * self.r}"]
        for (i, j), (i2, j2) in self.edge_list():
            lines.append(f"{i + 1},{j + 1} {i2 + 1},{j2 + 1}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "r": self.r,
            "edges": [[[a[0] + 1, a[1] + 1], [b[0] + 1, b[1] + 1]] for a, b in self.edge_list()],
            "max_degree": self.graph.max_degree,
        }


def _grid_coords(k: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(k * r)
    return idx // r, idx % r


def build_Bkr(k: int, r: int) -> GridGraph:
    """``B_k^r``: cliques on columns, complete bipartite minus a matching between neighbours.

    ``(i, j) ~ (i', j')`` iff ``i == i'`` or ``|i - i'| == 1`` and ``j != j'``.
    """
    if k < 1 or r < 1:
        raise PreconditionError("k and r must be positive")
    I, J = _grid_coords(k, r)
    di = np.abs(I[:, None] - I[None, :])
    same_j = J[:, None] == J[None, :]
    adj = ((di == 0) | ((di == 1) & ~same_j))
    np.fill_diagonal(adj, False)
    return GridGraph(k, r, Graph(adj))


def build_Kkr(k: int, r: int) -> GridGraph:
    """``K_k^r``: ``k`` disjoint copies of ``K_r``, one per column."""
    if k < 1 or r < 1:
        raise PreconditionError("k and r must be positive")
    I, _ = _grid_coords(k, r)
    adj = I[:, None] == I[None, :]
    np.fill_diagonal(adj, False)
    return GridGraph(k, r, Graph(adj))


def build_Rkr_path_augmented(k: int, r: int) -> GridGraph:
    """``B_k^r`` plus the vertical edges ``(i, j)(i+1, j)`` with ``i - j ≡ 0 (mod r)``.

    Indices in the congruence are 1-based, matching the usual picture: for
    ``r = 3`` the edge ``(1,1)(2,1)`` is present and ``(2,1)(3,1)`` is not.
    """
    if k < 2:
        raise PreconditionError("path-augmented grid needs k >= 2")
    B = build_Bkr(k, r)
    adj = B.adj.copy()
    for i in range(1, k):  # 1-based i in [k-1]
        for j in range(1, r + 1):
            if (i - j) % r == 0:
                u, v = (i - 1) * r + (j - 1), i * r + (j - 1)
                adj[u, v] = adj[v, u] = True
    R = GridGraph(k, r, Graph(adj))
    cov = covering_vertices(R)
    if any(len(c) == 0 for c in cov):
        raise AssertionError("path-augmented grid lacks a covering vertex")
    return R


def covering_vertices(R: GridGraph) -> list[np.ndarray]:
    """For each column ``i`` the vertices outside it adjacent to all of ``(i, *)``."""
    k, r = R.k, R.r
    I, _ = _grid_coords(k, r)
    out = []
    for i in range(k):
        col = np.arange(i * r, (i + 1) * r)
        ok = R.adj[:, col].all(axis=1) & (I != i)
        out.append(np.flatnonzero(ok))
    return out


def augment_reduced_graph(R_tilde: GridGraph, gamma: float, check_degree: bool = True) -> GridGraph:
    """Bounded-degree subgraph of ``R_tilde`` with a covering vertex per column.

    The output keeps the ``B_k^r`` edges of ``R_tilde`` and adds, for each
    column ``i`` in turn, the edges from a chosen covering vertex ``v_i`` to
    every ``(i, j)``.  Among the covering vertices used least often so far
    the one with the smallest index wins.

    The achieved maximum degree is stored in ``info`` next to the bound
    ``3 r + 2 / gamma``; exceeding the bound only warns, because the bound
    relies on divisibility that small grids do not have.
    """
    k, r = R_tilde.k, R_tilde.r
    kr = k * r
    need = ((r - 1) / r + gamma / 2) * kr
    mindeg = R_tilde.graph.min_degree
    if check_degree and mindeg < need - 1e-9:
        raise PreconditionError(
            f"minimum degree {mindeg} of the reduced graph is below ((r-1)/r + gamma/2)kr = {need:g}"
        )
    B = build_Bkr(k, r)
    if not R_tilde.contains(B):
        raise PreconditionError("reduced graph does not contain B_k^r")
    adj = B.adj.copy()
    cover = covering_vertices(R_tilde)
    uses = np.zeros(kr, dtype=np.int64)
    chosen = []
    for i in range(k):
        cands = cover[i]
        if len(cands) == 0:
            raise PreconditionError(f"column {i + 1} has no covering vertex")
        least = uses[cands].min()
        v = int(cands[uses[cands] == least][0])
        uses[v] += 1
        chosen.append(v)
        col = np.arange(i * r, (i + 1) * r)
        adj[v, col] = adj[col, v] = True
    bound = 3 * r + 2 / gamma
    R = GridGraph(k, r, Graph(adj), info={
        "covering": [list(divmod(v, r)) for v in chosen],
        "max_degree": None,
        "degree_bound": bound,
    })
    maxdeg = R.graph.max_degree
    R.info["max_degree"] = maxdeg
    R.info["degree_bound_holds"] = bool(maxdeg <= bound + 1e-9)
    if maxdeg > bound + 1e-9:
        warnings.warn(f"augmented reduced graph has degree {maxdeg} > 3r + 2/gamma = {bound:g}", stacklevel=2)
    return R


def build_Pmr(m: int, r: int) -> Graph:
    return path_power(m, r)


def build_Cmr(m: int, r: int) -> Graph:
    return cycle_power(m, r)


@dataclass(frozen=True)
class SurfaceConstants:
    genus: int
    r: int
    a: int
    n: int
    max_degree: int
    bw_bound: float
    clamped: bool

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "r": self.r,
            "a": self.a,
            "n": self.n,
            "max_degree": self.max_degree,
            "bw_bound": self.bw_bound,
            "clamped": self.clamped,
        }


def surface_constants(g: int, n: int, Delta: int) -> SurfaceConstants:
    """Colour bound, arrangeability bound and bandwidth bound for genus ``g``.

    ``r = floor((7 + sqrt(1 + 48 g)) / 2)``, ``a = (r + 1) ** 8`` and the
    bandwidth bound ``15 n log(Delta) / (log n - log min(1, g))``.  The
    logarithm of ``min(1, g)`` is undefined at ``g = 0``; it is replaced by
    0 there and ``clamped`` is set.

    Examples
    --------
    >>> surface_constants(1, 100, 3).r
    7
    """
    if g < 0 or n < 2 or Delta < 2:
        raise PreconditionError("need g >= 0, n >= 2 and Delta >= 2")
    r = (7 + math.isqrt(1 + 48 * g)) // 2
    # isqrt floors the root; the outer floor is unchanged by that
    a = (r + 1) ** 8
    clamped = g == 0
    sub = 0.0 if clamped else math.log(min(1, g))
    bw = 15 * n * math.log(Delta) / (math.log(n) - sub)
    return SurfaceConstants(g, r, a, n, Delta, bw, clamped)
