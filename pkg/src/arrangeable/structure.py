"""Arrangeability and bandwidth: certificates, exact search, heuristics.

An ordering ``(x_1, ..., x_n)`` has witness sizes

    w_i = |N(N(x_i) ∩ Right_i) ∩ Left_i|,

where ``Left_i = {x_1, ..., x_i}`` (so ``x_i`` itself counts) and
``Right_i = {x_{i+1}, ..., x_n}``.  The graph is ``a``-arrangeable under the
ordering when every ``w_i <= a``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, reverse_cuthill_mckee

from .errors import CapExceededError
from .graph import Graph, Labelling

__all__ = [
    "ArrangeabilityCertificate",
    "BandwidthCertificate",
    "arrangeability_of_order",
    "min_arrangeability_exact",
    "heuristic_arrangeability",
    "bandwidth_of_labelling",
    "heuristic_bandwidth_labelling",
]


@dataclass(frozen=True)
class ArrangeabilityCertificate:
    ordering: Labelling
    a: int
    witness: np.ndarray

    def to_json(self) -> dict:
        return {
            "ordering": self.ordering.to_json(),
            "a": int(self.a),
            "witness_sizes": [int(w) for w in self.witness],
        }


@dataclass(frozen=True)
class BandwidthCertificate:
    labelling: Labelling
    b: int

    def to_json(self) -> dict:
        return {"labelling": self.labelling.to_json(), "b": int(self.b)}


def _witness_sizes(G: Graph, order: np.ndarray) -> np.ndarray:
    n = G.n
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    A = G.csr[order][:, order]
    upper = sp.triu(A, k=1, format="csr")
    # reach[i, u] > 0 iff u is adjacent to some right neighbour of position i
    reach = (upper @ A).tocoo()
    keep = reach.col <= reach.row
    return np.bincount(reach.row[keep], minlength=n).astype(np.int64)


def arrangeability_of_order(G: Graph, ordering: Labelling) -> ArrangeabilityCertificate:
    """Exact witness sizes ``w_i`` of ``ordering`` and their maximum.

    Examples
    --------
    >>> from arrangeable.graph import complete, Labelling
    >>> arrangeability_of_order(complete(4), Labelling.identity(4)).a
    3
    """
    if len(ordering) != G.n:
        raise ValueError("ordering does not cover the vertex set")
    w = _witness_sizes(G, ordering.order)
    return ArrangeabilityCertificate(ordering, int(w.max()) if len(w) else 0, w)


def _back_witness(adj: np.ndarray, x: int, inside: np.ndarray) -> int:
    """``|N(N(x) \\ S) ∩ S|`` for the prefix set ``S = inside``."""
    out_nb = adj[x] & ~inside
    if not out_nb.any():
        return 0
    return int((adj[out_nb].any(axis=0) & inside).sum())


def min_arrangeability_exact(G: Graph, cap: int = 10) -> ArrangeabilityCertificate:
    """Globally optimal arrangeability by dynamic programming over prefix sets.

    ``f(S)`` is the best value over orderings whose first ``|S|`` vertices
    are ``S``; the last vertex ``x`` of the prefix contributes
    ``|N(N(x) \\ S) ∩ S|``, which depends on ``S`` only.  This needs
    ``O(2^n n)`` witness evaluations, hence the vertex cap.
    """
    n = G.n
    if n > cap:
        raise CapExceededError(
            f"exact arrangeability is capped at {cap} vertices (got {n}); "
            "use heuristic_arrangeability instead"
        )
    if n == 0:
        return arrangeability_of_order(G, Labelling.identity(0))
    adj = G.adj
    nbmask = [int(sum(1 << int(u) for u in np.flatnonzero(adj[v]))) for v in range(n)]
    full = (1 << n) - 1
    size = 1 << n
    best = np.full(size, np.iinfo(np.int64).max, dtype=np.int64)
    choice = np.full(size, -1, dtype=np.int64)
    best[0] = 0
    for S in range(1, size):
        out = full & ~S
        for x in range(n):
            if not (S >> x) & 1:
                continue
            reach = 0
            rest = nbmask[x] & out
            while rest:
                low = rest & -rest
                reach |= nbmask[low.bit_length() - 1]
                rest ^= low
            val = max(int(best[S & ~(1 << x)]), bin(reach & S).count("1"))
            if val < best[S]:
                best[S] = val
                choice[S] = x
    order = []
    S = full
    while S:
        x = int(choice[S])
        order.append(x)
        S &= ~(1 << x)
    order.reverse()
    cert = arrangeability_of_order(G, Labelling(order))
    assert cert.a == best[full]
    return cert


def _min_back_degree_last(G: Graph) -> np.ndarray:
    n = G.n
    adj = G.adj
    inside = np.ones(n, dtype=bool)
    w = np.array([_back_witness(adj, x, inside) for x in range(n)], dtype=np.int64)
    big = np.iinfo(np.int64).max
    order = np.empty(n, dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        cand = np.where(inside, w, big)
        x = int(np.argmin(cand))  # argmin returns the smallest id among ties
        order[pos] = x
        inside[x] = False
        # only vertices within distance 3 of x can see their witness change
        near = np.zeros(n, dtype=bool)
        near[x] = True
        for _ in range(3):
            near |= adj[near].any(axis=0)
        for y in np.flatnonzero(near & inside):
            w[y] = _back_witness(adj, int(y), inside)
    return order


def _degeneracy_order(G: Graph) -> np.ndarray:
    n = G.n
    deg = G.degrees.astype(np.int64).copy()
    alive = np.ones(n, dtype=bool)
    removed = []
    big = np.iinfo(np.int64).max
    for _ in range(n):
        v = int(np.argmin(np.where(alive, deg, big)))
        removed.append(v)
        alive[v] = False
        deg[G.neighbours(v)] -= 1
    return np.array(removed[::-1], dtype=np.int64)


_STRATEGIES = {
    "min-back-degree-last": _min_back_degree_last,
    "degeneracy-order": _degeneracy_order,
}


def heuristic_arrangeability(G: Graph, strategy: str = "min-back-degree-last") -> ArrangeabilityCertificate:
    """Upper bound on the arrangeability of ``G``.

    Parameters
    ----------
    strategy : {"min-back-degree-last", "degeneracy-order"}
        ``min-back-degree-last`` fills positions from the right, each time
        placing the vertex whose witness against the remaining prefix is
        smallest.  ``degeneracy-order`` reverses the order in which a
        minimum-degree vertex is repeatedly deleted.
    """
    try:
        fn = _STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {sorted(_STRATEGIES)}") from None
    if G.n == 0:
        return arrangeability_of_order(G, Labelling.identity(0))
    return arrangeability_of_order(G, Labelling(fn(G)))


def bandwidth_of_labelling(G: Graph, labelling: Labelling) -> BandwidthCertificate:
    """Maximum of ``|pos(u) - pos(v)|`` over the edges of ``G``."""
    if len(labelling) != G.n:
        raise ValueError("labelling does not cover the vertex set")
    e = G.edges
    if len(e) == 0:
        return BandwidthCertificate(labelling, 0)
    pos = labelling.position
    return BandwidthCertificate(labelling, int(np.abs(pos[e[:, 0]] - pos[e[:, 1]]).max()))


def _bfs_layers(G: Graph, start: int, allowed: np.ndarray) -> list[int]:
    """Cuthill-McKee order from ``start``: neighbours by ascending degree, then id."""
    deg = G.degrees
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        v = queue.popleft()
        nb = [int(u) for u in G.neighbours(v) if allowed[u] and int(u) not in seen]
        nb.sort(key=lambda u: (deg[u], u))
        for u in nb:
            seen.add(u)
            order.append(u)
            queue.append(u)
    return order


def _eccentric(G: Graph, start: int, allowed: np.ndarray) -> int:
    """Pseudo-peripheral vertex found by repeated breadth-first sweeps."""
    v = start
    last_depth = -1
    for _ in range(10):
        dist = {v: 0}
        queue = deque([v])
        while queue:
            x = queue.popleft()
            for u in G.neighbours(x):
                u = int(u)
                if allowed[u] and u not in dist:
                    dist[u] = dist[x] + 1
                    queue.append(u)
        depth = max(dist.values())
        far = min(u for u, d in dist.items() if d == depth)
        if depth <= last_depth:
            break
        last_depth = depth
        v = far
    return v


def _stretch(G: Graph, comp_vertices: list[int]) -> int:
    pos = {v: p for p, v in enumerate(comp_vertices)}
    best = 0
    for v in comp_vertices:
        for u in G.neighbours(v):
            best = max(best, abs(pos[v] - pos[int(u)]))
    return best


def heuristic_bandwidth_labelling(G: Graph, seed=None, starts: int = 4) -> BandwidthCertificate:
    """Low-bandwidth labelling from breadth-layer orderings with several starts.

    Each connected component is labelled separately and the components are
    concatenated.  Candidate starts are a pseudo-peripheral vertex, a
    minimum-degree vertex and ``starts`` further vertices drawn with
    ``seed``; the reverse Cuthill-McKee order from scipy also competes.
    Ties keep the earliest candidate, so the result is deterministic in
    ``seed``.
    """
    n = G.n
    if n == 0:
        return BandwidthCertificate(Labelling.identity(0), 0)
    rng = np.random.default_rng(seed)
    ncomp, comp = connected_components(G.csr, directed=False)
    rcm = reverse_cuthill_mckee(G.csr.tocsr(), symmetric_mode=True)
    deg = G.degrees
    order: list[int] = []
    for c in range(ncomp):
        allowed = comp == c
        verts = np.flatnonzero(allowed)
        if len(verts) == 1:
            order.append(int(verts[0]))
            continue
        cands = [_eccentric(G, int(verts[0]), allowed)]
        cands.append(int(verts[np.argmin(deg[verts])]))
        cands += [int(v) for v in rng.choice(verts, size=min(starts, len(verts)), replace=False)]
        best_order = [int(v) for v in rcm if allowed[v]]
        best_b = _stretch(G, best_order)
        for s in dict.fromkeys(cands):
            cand = _bfs_layers(G, s, allowed)
            b = _stretch(G, cand)
            if b < best_b:
                best_order, best_b = cand, b
        order += best_order
    return bandwidth_of_labelling(G, Labelling(order))
