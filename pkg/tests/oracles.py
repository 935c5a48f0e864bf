"""Independent brute-force oracles.

Everything here is written from the definitions with plain Python sets and
exact fractions, sharing no code with the library under test.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def neighbour_sets(adj):
    n = len(adj)
    return [{u for u in range(n) if adj[v][u]} for v in range(n)]


def arrangeability_value(adj, order) -> int:
    """max_i |N(N(x_i) ∩ Right_i) ∩ Left_i| with Left_i including x_i."""
    nb = neighbour_sets(adj)
    best = 0
    for i, x in enumerate(order):
        left = set(order[: i + 1])
        right = set(order[i + 1:])
        reach = set()
        for y in nb[x] & right:
            reach |= nb[y]
        best = max(best, len(reach & left))
    return best


def min_arrangeability(adj) -> int:
    n = len(adj)
    return min(arrangeability_value(adj, list(p)) for p in itertools.permutations(range(n)))


def bandwidth_value(adj, position) -> int:
    n = len(adj)
    return max((abs(position[u] - position[v]) for u in range(n) for v in range(u + 1, n) if adj[u][v]),
               default=0)


def min_bandwidth(adj) -> int:
    n = len(adj)
    return min(bandwidth_value(adj, p) for p in itertools.permutations(range(n)))


def is_regular(M, eps) -> bool:
    """Every A' ⊆ A, B' ⊆ B with |A'| >= eps|A|, |B'| >= eps|B| has |d(A',B') - d(A,B)| <= eps."""
    a, b = len(M), len(M[0])
    eps = Fraction(eps).limit_denominator(10**6)
    total = Fraction(sum(sum(int(x) for x in row) for row in M), a * b)
    rows = [k for k in range(1, a + 1) if k >= eps * a]
    cols = [k for k in range(1, b + 1) if k >= eps * b]
    for ka in rows:
        for A in itertools.combinations(range(a), ka):
            col_counts = [sum(int(M[i][j]) for i in A) for j in range(b)]
            for kb in cols:
                for B in itertools.combinations(range(b), kb):
                    d = Fraction(sum(col_counts[j] for j in B), ka * kb)
                    if abs(d - total) > eps:
                        return False
    return True


def is_regular_enumerated(M, eps) -> bool:
    """Same definition, every admissible (A', B') enumerated at once with integer arithmetic."""
    import numpy as np

    M = np.asarray(M, dtype=np.int64)
    a, b = M.shape
    fr = Fraction(eps).limit_denominator(10**6)
    p, q = fr.numerator, fr.denominator

    def subsets(size):
        idx = np.arange(1 << size)
        S = ((idx[:, None] >> np.arange(size)) & 1).astype(np.int64)
        k = S.sum(axis=1)
        keep = (k >= 1) & (k * q >= p * size)
        return S[keep], k[keep]

    SA, ka = subsets(a)
    SB, kb = subsets(b)
    E = SA @ M @ SB.T
    den = ka[:, None] * kb[None, :]
    N, e = a * b, int(M.sum())
    return bool((np.abs(E * N - e * den) * q <= p * den * N).all())


def is_balanced_intervals(tau, r, x) -> bool:
    """Every interval holds each colour 1..r within x of length/r; at most x zeros."""
    n = len(tau)
    if sum(1 for c in tau if c == 0) > x:
        return False
    for a in range(n):
        counts = [0] * (r + 1)
        for b in range(a, n):
            counts[tau[b]] += 1
            share = Fraction(b - a + 1, r)
            for i in range(1, r + 1):
                if abs(counts[i] - share) > x:
                    return False
    return True


def has_cycle_power_copy(adj, m, r) -> bool:
    """Does the graph contain C_m^r as a (not necessarily induced) subgraph?"""
    import networkx as nx
    from networkx.algorithms import isomorphism

    k = len(adj)
    G = nx.Graph()
    G.add_nodes_from(range(k))
    G.add_edges_from((u, v) for u in range(k) for v in range(u + 1, k) if adj[u][v])
    C = nx.Graph()
    C.add_edges_from((i, (i + d) % m) for i in range(m) for d in range(1, r + 1))
    return isomorphism.GraphMatcher(G, C).subgraph_is_monomorphic()
