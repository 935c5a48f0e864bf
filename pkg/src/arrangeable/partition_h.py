"""Partition of the guest graph onto a grid reduced graph.

:func:`partition_H` maps ``V(H)`` onto ``[k] x [r]`` with an exceptional set
``X`` and audits the four clauses

* H1: ``|X ∩ W_ij| <= xi n`` and ``|N(X ∩ W_ij) ∩ W_i'j'| <= xi n``;
* H2: ``|W_ij|`` within ``xi n`` of ``m_ij``;
* H3: every edge lands on an edge of ``R``;
* H4: every edge with an endpoint outside ``X`` lands on an edge of ``K_k^r``.

:func:`homomorphism_to_cycle_power` composes such a map with the grouping
maps ``f_star`` and ``f_double_star`` to reach ``C_m^r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .backbone import GridGraph, build_Kkr, build_Rkr_path_augmented, covering_vertices
from .colouring import (
    BlockStructure,
    balance_colouring,
    beta_n,
    block_zero_mask,
    build_blocks,
    colour_along_labelling,
    is_zero_free_colouring,
)
from .errors import ColouringError, PartitionError, PreconditionError
from .graph import Graph, IntegerPartitionGrid, Labelling, equitable_grid, is_proper_colouring

__all__ = [
    "HomomorphismMap",
    "choose_cuts",
    "partition_H",
    "audit_partition",
    "f_star",
    "f_double_star",
    "homomorphism_to_cycle_power",
    "lemma_k_prime",
]

_TOL = 1e-9


@dataclass
class HomomorphismMap:
    """Vertex map ``f`` from the guest graph onto a target graph.

    ``f[v]`` is a target index: ``i * r + j`` for a grid target or a cycle
    position for a cycle-power target.  ``X`` is a boolean mask.
    """

    f: np.ndarray
    X: np.ndarray
    target: str
    shape: tuple
    class_sizes: np.ndarray
    cuts: list[int] = field(default_factory=list)
    boundary: np.ndarray | None = None
    colouring: np.ndarray | None = None
    audit: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def num_targets(self) -> int:
        return int(np.prod(self.shape))

    def classes(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.f == c) for c in range(self.num_targets)]

    def to_json(self) -> dict:
        if self.target == "grid":
            r = self.shape[1]
            f = [[int(c) // r + 1, int(c) % r + 1] for c in self.f]
        else:
            f = [int(c) + 1 for c in self.f]
        out = {
            "target": self.target,
            "shape": list(self.shape),
            "f": f,
            "X": [int(v) + 1 for v in np.flatnonzero(self.X)],
            "class_sizes": [int(s) for s in self.class_sizes],
            "cuts": list(self.cuts),
            "audit": self.audit,
            "info": self.info,
        }
        if self.boundary is not None:
            out["boundary"] = [int(v) + 1 for v in np.flatnonzero(self.boundary)]
        return out


def choose_cuts(blocks: BlockStructure, zero_blocks: np.ndarray, M) -> list[int]:
    """Block counts ``t_0 = 0 < t_1 < ... < t_k = T`` for the column cuts.

    ``t_i`` is the largest block count whose prefix length ``P(t_i)`` does
    not exceed ``S_i = M_1 + ... + M_i`` such that blocks ``t_i`` and
    ``t_i + 1`` (1-based) are zero free; the cut must also satisfy
    ``S_i - P(t_i) < 12 r beta n`` (the slack is rounded up).

    Raises
    ------
    PreconditionError
        When some cut has no admissible position.
    """
    M = np.asarray(M, dtype=np.int64)
    k = len(M)
    T = blocks.count
    prefix = np.concatenate([[0], np.cumsum(blocks.sizes())])
    if prefix[-1] != M.sum():
        raise PreconditionError(f"column sums total {M.sum()} but H has {prefix[-1]} vertices")
    slack = math.ceil(12 * blocks.r * blocks.beta * blocks.n - _TOL)
    S = np.cumsum(M)
    cuts = [0]
    for i in range(k - 1):
        best = None
        for t in range(T - 1, cuts[-1], -1):  # t blocks to the left, 1 <= t <= T-1
            if prefix[t] > S[i]:
                continue
            if S[i] - prefix[t] >= slack:
                break
            if not zero_blocks[t - 1] and not zero_blocks[t]:
                best = t
                break
        if best is None:
            raise PreconditionError(
                f"no zero-free pair of blocks within the slack window for cut {i + 1} (target {S[i]})"
            )
        cuts.append(best)
    cuts.append(T)
    if k > 1 and len(set(cuts)) != len(cuts):
        raise PreconditionError("cuts are not distinct; columns are smaller than one block")
    return cuts


def _neighbourhood_counts(H: Graph, f: np.ndarray, X: np.ndarray, s: int) -> np.ndarray:
    """``out[c, c'] = |N_H(X ∩ W_c) ∩ W_c'|``."""
    n = H.n
    xs = np.flatnonzero(X)
    ind = sp.csr_matrix((np.ones(len(xs)), (xs, f[xs])), shape=(n, s))
    touched = (H.csr @ ind) > 0  # touched[u, c]: u has a neighbour in X ∩ W_c
    touched = sp.csr_matrix(touched)
    member = sp.csr_matrix((np.ones(n), (np.arange(n), f)), shape=(n, s))
    return np.asarray((touched.T @ member).todense(), dtype=np.int64)


def audit_partition(H: Graph, f, X, R: GridGraph, m: IntegerPartitionGrid, xi: float) -> dict:
    """Check H1-H4 for a grid map; returns per-clause verdicts and slack."""
    f = np.asarray(f, dtype=np.int64)
    X = np.asarray(X, dtype=bool)
    n = H.n
    s = R.k * R.r
    bound = xi * n
    sizes = np.bincount(f, minlength=s)
    x_sizes = np.bincount(f[X], minlength=s)
    nb = _neighbourhood_counts(H, f, X, s)
    h1 = bool(x_sizes.max(initial=0) <= bound + _TOL and nb.max(initial=0) <= bound + _TOL)
    dev = np.abs(sizes - m.flat())
    h2 = bool(dev.max(initial=0) <= bound + _TOL)
    e = H.edges
    fu, fv = f[e[:, 0]], f[e[:, 1]]
    bad3 = ~R.adj[fu, fv]
    K = build_Kkr(R.k, R.r)
    outside = ~(X[e[:, 0]] & X[e[:, 1]])
    bad4 = outside & ~K.adj[fu, fv]
    return {
        "H1": {"ok": h1, "max_X_in_class": int(x_sizes.max(initial=0)),
               "max_neighbourhood": int(nb.max(initial=0)), "bound": bound},
        "H2": {"ok": h2, "max_deviation": int(dev.max(initial=0)), "bound": bound},
        "H3": {"ok": bool(not bad3.any()), "violations": [[int(a) + 1, int(b) + 1] for a, b in e[bad3][:10]]},
        "H4": {"ok": bool(not bad4.any()), "violations": [[int(a) + 1, int(b) + 1] for a, b in e[bad4][:10]]},
    }


def _prepare_colouring(H, labelling, sigma, r, ell, beta, strict):
    """Balance ``sigma`` with the strongest window its zero pattern allows."""
    blocks = build_blocks(H.n, r, beta)
    if is_zero_free_colouring(sigma, blocks, 2 * ell, labelling):
        use = ell
    elif ell >= 2 and is_zero_free_colouring(sigma, blocks, ell, labelling):
        use = ell // 2
    else:
        raise ColouringError(f"colouring is not ({ell}, beta)-zero free")
    out, rep = balance_colouring(H, labelling, sigma, r, use, beta, strict=strict, return_report=True)
    return out, use, rep


def partition_H(
    H: Graph,
    labelling: Labelling,
    sigma,
    R: GridGraph,
    m: IntegerPartitionGrid,
    beta: float,
    xi: float,
    strict: bool = False,
    balance: bool = True,
) -> HomomorphismMap:
    """Map ``H`` onto the grid of ``R`` and certify H1-H4.

    Parameters
    ----------
    H : Graph
    labelling : Labelling
        Labelling of bandwidth at most ``beta * n``.
    sigma : array_like
        Proper colouring with values in ``0..r``, zero free with window
        ``10 / xi`` (or ``20 / xi``, which allows the full balancing step).
    R : GridGraph
        Contains ``B_k^r`` and has a covering vertex for every column.
    m : IntegerPartitionGrid
        ``r``-equitable target sizes summing to ``n``.
    strict : bool
        Enforce ``beta <= xi^2 / (1200 r)``.  Off by default: desk-scale
        instances sit outside that regime and are certified by the audit.
    balance : bool
        Run the balancing step first.

    Raises
    ------
    PartitionError
        If the audit finds a violated clause; its ``clause`` names it.
    """
    n = H.n
    k, r = R.k, R.r
    sigma = np.asarray(sigma, dtype=np.int64)
    if m.k != k or m.r != r:
        raise PreconditionError("target grid shape differs from the reduced graph")
    if m.total != n:
        raise PreconditionError(f"target sizes sum to {m.total}, not n = {n}")
    if not m.is_equitable():
        raise PreconditionError("target sizes are not r-equitable")
    if strict and beta > xi * xi / (1200 * r) + _TOL:
        raise PreconditionError(f"beta={beta:g} exceeds xi^2/(1200 r)={xi * xi / (1200 * r):g}")
    if (m.flat() < 12 * beta * n - _TOL).any() and k > 1:
        raise PreconditionError(f"some m_ij is below 12 beta n = {12 * beta * n:g}")
    if not is_proper_colouring(H, sigma):
        raise ColouringError("colouring is not proper")
    e = H.edges
    pos = labelling.position
    w = beta_n(beta, n)
    if len(e) and np.abs(pos[e[:, 0]] - pos[e[:, 1]]).max() > w:
        raise PreconditionError(f"labelling bandwidth exceeds beta n = {w}")

    ell = max(1, int(round(10 / xi)))
    info = {}
    if balance:
        sigma, used_ell, rep = _prepare_colouring(H, labelling, sigma, r, ell, beta, strict)
        info["balance_ell"] = used_ell
        info["switching_blocks"] = len(rep.switching_blocks)
    blocks = build_blocks(n, r, beta)
    tau = sigma[labelling.order]
    zero_blocks = block_zero_mask(tau, blocks)
    M = m.m.sum(axis=1)
    cuts = choose_cuts(blocks, zero_blocks, M)

    cover = covering_vertices(R)
    s_vertex = []
    for i in range(k):
        if len(cover[i]) == 0:
            raise PreconditionError(f"reduced graph has no covering vertex for column {i + 1}")
        s_vertex.append(int(cover[i][0]))

    # column of each label position
    col_of_block = np.zeros(blocks.count, dtype=np.int64)
    for i in range(k):
        col_of_block[cuts[i]:cuts[i + 1]] = i
    col_pos = col_of_block[blocks.block_of(np.arange(n))]
    f_pos = np.where(tau == 0, np.array(s_vertex)[col_pos], col_pos * r + (tau - 1))
    boundary_pos = np.zeros(n, dtype=bool)
    for i in range(1, k):
        t = cuts[i]
        end_left = int(blocks.ends[t - 1])
        start_right = int(blocks.starts[t])
        boundary_pos[max(end_left - w, int(blocks.starts[t - 1])):end_left] = True
        boundary_pos[start_right:min(start_right + w, int(blocks.ends[t]))] = True
    if (tau[boundary_pos] == 0).any():
        raise PartitionError("boundary", "a boundary vertex has colour 0")

    order = labelling.order
    f = np.empty(n, dtype=np.int64)
    f[order] = f_pos
    boundary = np.zeros(n, dtype=bool)
    boundary[order] = boundary_pos
    zeros = sigma == 0
    X1 = zeros.copy()
    if zeros.any():
        X1 |= H.adj[zeros].any(axis=0)
    X = X1 | boundary

    audit = audit_partition(H, f, X, R, m, xi)
    sizes = np.bincount(f, minlength=k * r)
    hm = HomomorphismMap(
        f=f, X=X, target="grid", shape=(k, r), class_sizes=sizes,
        cuts=[int(c) for c in cuts], boundary=boundary, colouring=sigma,
        audit=audit, info={**info, "covering": [[v // r + 1, v % r + 1] for v in s_vertex],
                           "X1": int(X1.sum()), "X2": int(boundary.sum())},
    )
    for clause in ("H1", "H2", "H3", "H4"):
        if not audit[clause]["ok"]:
            raise PartitionError(clause, f"audit failed: {audit[clause]}", details=hm)
    return hm


# --------------------------------------------------------------------------
# cycle-power homomorphism


def f_star(i: int, j: int, r: int) -> int:
    """Group grid vertex ``(i, j)`` (1-based) into a path-power position.

    With ``i = -(r - j) + r l + x`` for ``x`` in ``[r]`` the image is
    ``r l + j``.  ``l`` may be 0 for the first columns.

    Examples
    --------
    >>> f_star(4, 2, 3)
    5
    """
    if i < 1 or not 1 <= j <= r:
        raise ValueError("need i >= 1 and 1 <= j <= r")
    ell = (i + r - j - 1) // r
    return r * ell + j


def f_double_star(y: int, m: int) -> int:
    """Wrap a path position onto the cycle: ``(y mod m) + 1``."""
    return y % m + 1


def lemma_k_prime(n: int, r: int, m: int, beta: float) -> int | None:
    """Largest ``k' = j m - r + 1 >= 2`` with ``floor(n / (k' r)) >= 12 beta n``.

    Returns None when no such ``k'`` exists.
    """
    best = None
    j = 1
    while True:
        kp = j * m - r + 1
        if kp * r > n:
            break
        if kp >= 2 and n // (kp * r) >= 12 * beta * n - _TOL:
            best = kp
        j += 1
    return best


def _cycle_audit(H: Graph, f: np.ndarray, m: int, r: int, xi: float) -> dict:
    e = H.edges
    d = np.abs(f[e[:, 0]] - f[e[:, 1]]) % m
    d = np.minimum(d, m - d)
    bad = (d < 1) | (d > r)
    sizes = np.bincount(f, minlength=m)
    # no integer assignment beats ceil(n/m), which exceeds (1 + xi) n/m for small n
    floor = math.ceil(H.n / m)
    bound = max((1 + xi) * H.n / m, floor)
    return {
        "homomorphism": {"ok": bool(not bad.any()),
                         "violations": [[int(a) + 1, int(b) + 1] for a, b in e[bad][:10]]},
        "class_size": {"ok": bool(sizes.max(initial=0) <= bound + _TOL),
                       "max": int(sizes.max(initial=0)), "bound": bound,
                       "xi_bound": (1 + xi) * H.n / m, "rounding_floor": floor},
    }


def homomorphism_to_cycle_power(
    H: Graph,
    labelling: Labelling,
    r: int,
    m: int,
    xi: float,
    beta: float | None = None,
    sigma=None,
    route: str = "auto",
    xi_h: float | None = None,
) -> HomomorphismMap:
    """Homomorphism ``H -> C_m^r`` with every class at most ``(1 + xi) n / m``.

    When ``ceil(n / m)`` is larger than that bound no map can meet it, and
    the audit accepts classes of size ``ceil(n / m)`` instead.

    Parameters
    ----------
    route : {"auto", "lemma", "bandwidth"}
        ``lemma`` builds ``f'`` with :func:`partition_H` on the
        path-augmented grid with ``k'`` columns and composes it with
        :func:`f_star` and :func:`f_double_star`.  ``bandwidth`` applies
        ``f_double_star`` directly to label positions, which is a
        homomorphism whenever the labelling has bandwidth at most ``r``.
        ``auto`` takes the bandwidth route when the labelling already has
        bandwidth at most ``r`` (its classes differ by at most one) and the
        lemma route otherwise.
    xi_h : float, optional
        Tolerance handed to :func:`partition_H`; defaults to ``xi``.

    Raises
    ------
    PartitionError
        ``"homomorphism"`` or ``"class_size"`` when the final audit fails.
    """
    n = H.n
    if m < 2 * r:
        raise PreconditionError(f"need m >= 2r, got m={m}, r={r}")
    e = H.edges
    pos = labelling.position
    bw = int(np.abs(pos[e[:, 0]] - pos[e[:, 1]]).max()) if len(e) else 0
    if beta is None:
        beta = max(bw, 1) / n
    kp = lemma_k_prime(n, r, m, beta)
    if route == "auto":
        route = "bandwidth" if bw <= r else "lemma"
    info = {"route": route, "bandwidth": bw}
    if route == "bandwidth":
        if bw > r:
            raise PreconditionError(f"bandwidth route needs bandwidth <= r, got {bw}")
        f = pos % m
        hm = HomomorphismMap(f=f.astype(np.int64), X=np.zeros(n, dtype=bool), target="cycle",
                             shape=(m,), class_sizes=np.bincount(f, minlength=m), info=info)
    elif route == "lemma":
        if kp is None:
            raise PreconditionError("no k' satisfies floor(n/(k'r)) >= 12 beta n; instance too small")
        R = build_Rkr_path_augmented(kp, r)
        grid = equitable_grid(n, kp, r)
        if sigma is None:
            sigma = colour_along_labelling(H, labelling, r)
        inner = partition_H(H, labelling, sigma, R, grid, beta, xi if xi_h is None else xi_h)
        star = np.array([f_star(i + 1, j + 1, r) for i in range(kp) for j in range(r)])
        f = np.array([f_double_star(int(y), m) - 1 for y in star[inner.f]], dtype=np.int64)
        info.update({"k_prime": kp, "inner_audit": inner.audit, "inner_class_sizes": inner.class_sizes.tolist()})
        hm = HomomorphismMap(f=f, X=inner.X, target="cycle", shape=(m,),
                             class_sizes=np.bincount(f, minlength=m), info=info)
    else:
        raise ValueError(f"unknown route {route!r}")
    hm.audit = _cycle_audit(H, hm.f, m, r, xi)
    for clause in ("homomorphism", "class_size"):
        if not hm.audit[clause]["ok"]:
            raise PartitionError(clause, f"audit failed: {hm.audit[clause]}", details=hm)
    return hm
