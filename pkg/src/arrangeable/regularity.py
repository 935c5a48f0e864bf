"""Density, epsilon-regularity and host partitions.

Three verification modes are offered for a pair ``(A, B)``:

``exact``
    Enumerates every subset ``A'`` of the smaller side with
    ``|A'| >= eps |A|``; for fixed ``A'`` and size ``b'`` the extreme
    densities over ``B'`` come from the ``b'`` largest and smallest degrees
    into ``A'``, so the search is exhaustive.  Comparisons use integers.
``codegree``
    A heuristic built from degree and common-neighbourhood data only.  It
    refutes regularity when some set of at most ``t_max`` vertices (large
    enough to qualify as ``A'``) has a deviating ``B'``, and otherwise
    accepts when almost all degrees and pair codegrees are close to their
    expected values ``d |B|`` and ``d^2 |B|``.
``sampled``
    Random qualifying ``A'`` with optimal ``B'``; a reported witness is
    always real, a pass is statistical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapExceededError, PreconditionError, SwapBudgetExhausted
from .graph import Graph

__all__ = [
    "CodegreeConfig",
    "RegularityVerdict",
    "density",
    "check_regular_pair",
    "check_regular_matrix",
    "check_super_regular",
    "ClusterPartition",
    "build_host_partition",
    "ColouredPartition",
    "coloured_regular_partition",
    "find_mono_cycle_power",
    "iter_mono_cycle_powers",
    "is_cycle_power_copy",
]

MODES = ("exact", "codegree", "sampled")


@dataclass(frozen=True)
class CodegreeConfig:
    """Constants of the codegree heuristic.

    ``t_max`` bounds the size of the small witness sets; ``tol`` scales the
    allowed codegree deviation ``tol * eps * |B|`` and ``bad`` the allowed
    fraction ``bad * eps`` of deviating vertices or pairs.
    """

    t_max: int = 3
    tol: float = 1.5
    bad: float = 0.5


@dataclass
class RegularityVerdict:
    pair: tuple
    density: Fraction
    mode: str
    eps: float
    regular: bool
    witness: tuple | None = None
    min_degree_ok: bool | None = None
    delta: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def super_regular(self) -> bool:
        return bool(self.regular and self.min_degree_ok and self.density >= Fraction(self.delta).limit_denominator(10**6))

    def to_json(self) -> dict:
        out = {
            "pair": [int(p) + 1 for p in self.pair],
            "density": float(self.density),
            "mode": self.mode,
            "eps": self.eps,
            "regular": bool(self.regular),
            "heuristic": self.mode != "exact",
        }
        if self.witness is not None:
            out["witness"] = [[int(v) + 1 for v in self.witness[0]], [int(v) + 1 for v in self.witness[1]]]
        if self.delta is not None:
            out["delta"] = self.delta
            out["min_degree_ok"] = bool(self.min_degree_ok)
        if self.details:
            out["details"] = self.details
        return out


def _as_sets(G: Graph, A, B) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=np.int64).reshape(-1)
    B = np.asarray(B, dtype=np.int64).reshape(-1)
    if len(A) == 0 or len(B) == 0:
        raise PreconditionError("A and B must be nonempty")
    if len(np.intersect1d(A, B)) or len(np.unique(A)) != len(A) or len(np.unique(B)) != len(B):
        raise PreconditionError("A and B must be disjoint sets")
    if min(A.min(), B.min()) < 0 or max(A.max(), B.max()) >= G.n:
        raise PreconditionError("vertex out of range")
    return A, B


def density(G: Graph, A, B) -> Fraction:
    """``e(A, B) / (|A| |B|)`` as an exact fraction.

    Examples
    --------
    >>> from arrangeable.graph import Graph
    >>> density(Graph.from_edges(4, [(0, 2), (1, 3)]), [0, 1], [2, 3])
    Fraction(1, 2)
    """
    A, B = _as_sets(G, A, B)
    e = int(G.adj[np.ix_(A, B)].sum())
    return Fraction(e, len(A) * len(B))


def _eps_fraction(eps: float) -> Fraction:
    return Fraction(eps).limit_denominator(10**6)


def _min_size(eps: Fraction, size: int) -> int:
    return max(1, math.ceil(eps * size))


def _subset_masks(a: int) -> np.ndarray:
    idx = np.arange(1 << a, dtype=np.int64)
    return ((idx[:, None] >> np.arange(a)) & 1).astype(np.int64)


def _exact(M: np.ndarray, eps: Fraction):
    """Exhaustive check of a 0/1 matrix; returns ``(regular, witness)``."""
    transposed = M.shape[0] > M.shape[1]
    Y = M.T if transposed else M
    a, b = Y.shape
    p, q = eps.numerator, eps.denominator
    e = int(Y.sum())
    N = a * b
    S = _subset_masks(a)
    sizes = S.sum(axis=1)
    keep = sizes * q >= p * a
    S, sizes = S[keep], sizes[keep]
    deg = S @ Y
    order_desc = np.argsort(-deg, axis=1, kind="stable")
    order_asc = np.argsort(deg, axis=1, kind="stable")
    top = np.cumsum(np.take_along_axis(deg, order_desc, axis=1), axis=1)
    bot = np.cumsum(np.take_along_axis(deg, order_asc, axis=1), axis=1)
    bs = np.arange(1, b + 1)
    okb = bs * q >= p * b
    ab = sizes[:, None] * bs[None, :]
    bad_top = (np.abs(top * N - e * ab) * q > p * ab * N) & okb[None, :]
    bad_bot = (np.abs(bot * N - e * ab) * q > p * ab * N) & okb[None, :]
    for bad, order in ((bad_top, order_desc), (bad_bot, order_asc)):
        hit = np.argwhere(bad)
        if len(hit):
            row, col = hit[0]
            Ap = np.flatnonzero(S[row])
            Bp = np.sort(order[row, : col + 1])
            return False, ((Bp, Ap) if transposed else (Ap, Bp))
    return True, None


def _deviating_B(deg: np.ndarray, a_size: int, d: float, eps: float, b_min: int):
    """Best ``B'`` for fixed ``A'`` given degrees into ``A'``; None if none deviates."""
    b = len(deg)
    bs = np.arange(1, b + 1)
    sel = bs >= b_min
    for order in (np.argsort(-deg, kind="stable"), np.argsort(deg, kind="stable")):
        dens = np.cumsum(deg[order]) / (a_size * bs)
        hit = np.flatnonzero(sel & (np.abs(dens - d) > eps + 1e-12))
        if len(hit):
            return np.sort(order[: hit[0] + 1])
    return None


def _codegree(M: np.ndarray, eps: float, cfg: CodegreeConfig):
    a, b = M.shape
    d = M.mean()
    details = {}
    for transposed, Y in ((False, M), (True, M.T)):
        aa, bb = Y.shape
        a0 = math.ceil(eps * aa - 1e-12)
        if a0 > cfg.t_max:
            continue
        b0 = max(1, math.ceil(eps * bb - 1e-12))
        for t in range(max(a0, 1), min(cfg.t_max, aa) + 1):
            for S in itertools.combinations(range(aa), t):
                Bp = _deviating_B(Y[list(S)].sum(axis=0), t, d, eps, b0)
                if Bp is not None:
                    Ap = np.array(S)
                    return False, ((Bp, Ap) if transposed else (Ap, Bp)), {"refuted_by": f"{t}-set"}
    if max(d, 1 - d) <= eps:
        return True, None, {"trivial": True}
    tol = cfg.tol * eps * b
    C = M @ M.T
    iu = np.triu_indices(a, 1)
    deg_ok = np.abs(M.sum(axis=1) - d * b) <= tol
    details["degree_fraction"] = float(deg_ok.mean())
    if len(iu[0]):
        co_ok = np.abs(C[iu] - d * d * b) <= tol
        details["codegree_fraction"] = float(co_ok.mean())
    else:
        co_ok = np.ones(1, dtype=bool)
    ok = deg_ok.mean() >= 1 - cfg.bad * eps and co_ok.mean() >= 1 - cfg.bad * eps
    return bool(ok), None, details


def _sampled(M: np.ndarray, eps: float, samples: int, rng: np.random.Generator):
    d = M.mean()
    for transposed, Y in ((False, M), (True, M.T)):
        aa, bb = Y.shape
        a0 = max(1, math.ceil(eps * aa - 1e-12))
        b0 = max(1, math.ceil(eps * bb - 1e-12))
        for _ in range(samples):
            size = int(rng.integers(a0, aa + 1))
            Ap = np.sort(rng.choice(aa, size=size, replace=False))
            Bp = _deviating_B(Y[Ap].sum(axis=0), size, d, eps, b0)
            if Bp is not None:
                return False, ((Bp, Ap) if transposed else (Ap, Bp))
    return True, None


def check_regular_matrix(
    M,
    eps: float,
    mode: str = "exact",
    cap: int = 14,
    samples: int = 200,
    seed=None,
    config: CodegreeConfig | None = None,
):
    """Regularity of the bipartite pair with biadjacency matrix ``M``.

    Returns ``(regular, witness, details)`` where ``witness`` is a pair of
    row and column index arrays whose density deviates by more than ``eps``.
    """
    M = np.asarray(M, dtype=np.int64)
    if mode == "exact":
        if max(M.shape) > cap:
            raise CapExceededError(f"exact mode is capped at {cap} vertices per side (got {M.shape})")
        ok, wit = _exact(M, _eps_fraction(eps))
        return ok, wit, {}
    if mode == "codegree":
        return _codegree(M, eps, config or CodegreeConfig())
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        ok, wit = _sampled(M, eps, samples, rng)
        return ok, wit, {"samples": samples, "orientations": 2}
    raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")


def check_regular_pair(
    G: Graph,
    A,
    B,
    eps: float,
    mode: str = "exact",
    cap: int = 14,
    samples: int = 200,
    seed=None,
    config: CodegreeConfig | None = None,
) -> RegularityVerdict:
    """Is ``(A, B)`` an ``eps``-regular pair of ``G``?

    Exact verdicts are ground truth; ``codegree`` and ``sampled`` verdicts
    are marked heuristic in the report.  Any witness returned is a genuine
    violating pair ``(A', B')`` of vertex ids.
    """
    A, B = _as_sets(G, A, B)
    M = G.adj[np.ix_(A, B)]
    ok, wit, details = check_regular_matrix(M, eps, mode, cap, samples, seed, config)
    if wit is not None:
        wit = (A[wit[0]], B[wit[1]])
    return RegularityVerdict(
        pair=(int(A[0]), int(B[0])), density=Fraction(int(M.sum()), M.size), mode=mode,
        eps=float(eps), regular=bool(ok), witness=wit, details=details,
    )


def _min_degree_ok(M: np.ndarray, delta: float) -> bool:
    a, b = M.shape
    return bool((M.sum(axis=1) >= delta * b - 1e-9).all() and (M.sum(axis=0) >= delta * a - 1e-9).all())


def check_super_regular(G: Graph, A, B, eps: float, delta: float, mode: str = "exact", **kwargs) -> RegularityVerdict:
    """Super-regularity: density at least ``delta``, exact minimum-degree clause, regularity by ``mode``."""
    verdict = check_regular_pair(G, A, B, eps, mode, **kwargs)
    A, B = _as_sets(G, A, B)
    verdict.min_degree_ok = _min_degree_ok(G.adj[np.ix_(A, B)], delta)
    verdict.delta = float(delta)
    return verdict


# --------------------------------------------------------------------------
# host partition


@dataclass
class ClusterPartition:
    """Clusters ``V_0 .. V_{s-1}`` with reduced graph ``R`` and spine ``R_star``."""

    clusters: list[np.ndarray]
    R: Graph
    R_star: Graph
    eps: float
    delta: float
    verdicts: dict = field(default_factory=dict)
    swap_log: list = field(default_factory=list)
    mode: str = "codegree"

    @property
    def s(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.clusters], dtype=np.int64)

    def labels(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=np.int64)
        for i, c in enumerate(self.clusters):
            out[c] = i
        return out

    @property
    def certified(self) -> bool:
        for (i, j), v in self.verdicts.items():
            if self.R_star.has_edge(i, j):
                if not v.super_regular:
                    return False
            elif not (v.regular and v.density >= Fraction(self.delta).limit_denominator(10**6)):
                return False
        return True

    def failed_pairs(self) -> list[tuple[int, int]]:
        out = []
        for (i, j), v in self.verdicts.items():
            ok = v.super_regular if self.R_star.has_edge(i, j) else (
                v.regular and v.density >= Fraction(self.delta).limit_denominator(10**6))
            if not ok:
                out.append((i, j))
        return out

    def to_json(self) -> dict:
        return {
            "clusters": [[int(v) + 1 for v in c] for c in self.clusters],
            "sizes": self.sizes.tolist(),
            "eps": self.eps,
            "delta": self.delta,
            "mode": self.mode,
            "R": [[int(u) + 1, int(v) + 1] for u, v in self.R.edges],
            "R_star": [[int(u) + 1, int(v) + 1] for u, v in self.R_star.edges],
            "pairs": [self.verdicts[key].to_json() for key in sorted(self.verdicts)],
            "certified": self.certified,
            "swap_log": self.swap_log,
        }


def _deficits(C: np.ndarray, labels: np.ndarray, sizes: np.ndarray, K: np.ndarray, delta: float) -> np.ndarray:
    """``slack[v, c] = C[v, c] - delta |V_c|`` restricted to ``c`` adjacent to ``v``'s cluster in ``K``."""
    need = delta * sizes[None, :]
    slack = C - need
    mask = K[labels]
    return np.where(mask, slack, np.inf)


def build_host_partition(
    G: Graph,
    targets,
    R: Graph,
    K: Graph,
    eps: float,
    delta: float,
    seed=None,
    budget: int = 500,
    mode: str = "codegree",
    samples: int = 200,
    config: CodegreeConfig | None = None,
) -> ClusterPartition:
    """Random partition with exact sizes, repaired for minimum degree on ``K``.

    Parameters
    ----------
    targets : array_like
        Cluster sizes ``n_c`` summing to ``G.n`` (a flattened grid).
    R, K : Graph
        Reduced graph and super-regular spine on the cluster indices.
    budget : int
        Maximum number of vertex swaps.

    Every ``K``-pair is made to satisfy the minimum-degree clause exactly
    by swapping a deficient vertex with a vertex of a cluster where it has
    many neighbours.  Regularity of ``R``- and ``K``-pairs is then
    certified in ``mode`` and reported.

    Raises
    ------
    SwapBudgetExhausted
        With the list of still deficient vertices.
    """
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    n = G.n
    s = len(targets)
    if targets.sum() != n or (targets < 1).any():
        raise PreconditionError(f"target sizes must be positive and sum to {n} (got {targets.sum()})")
    if R.n != s or K.n != s:
        raise PreconditionError("reduced graphs must have one vertex per cluster")
    if (K.adj & ~R.adj).any():
        raise PreconditionError("K must be a subgraph of R")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(s), targets)[rng.permutation(n)]
    A = G.adj.astype(np.int64)
    onehot = np.zeros((n, s), dtype=np.int64)
    onehot[np.arange(n), labels] = 1
    C = A @ onehot
    Kadj = K.adj
    log = []
    for step in range(budget + 1):
        slack = _deficits(C, labels, targets, Kadj, delta)
        worst = slack.min(axis=1)
        deficient = np.flatnonzero(worst < -1e-9)
        if len(deficient) == 0:
            break
        if step == budget:
            raise SwapBudgetExhausted(
                f"{len(deficient)} vertices still violate the minimum-degree clause after {budget} swaps",
                report={"deficient": [int(v) + 1 for v in deficient[:50]], "swap_log": log},
            )
        v = int(deficient[rng.integers(len(deficient))])
        a = labels[v]
        # score of placing v in cluster c: its worst slack against c's K-neighbours
        need = delta * targets[None, :]
        slack_v = np.where(Kadj, C[v][None, :] - need, np.inf).min(axis=1)
        slack_v[a] = -np.inf
        order = np.argsort(-slack_v, kind="stable")
        done = False
        for c in order[: max(1, s // 2)]:
            if slack_v[c] == -np.inf:
                break
            members = np.flatnonzero(labels == c)
            # how well would each member fit into cluster a
            fit = np.where(Kadj[a][None, :], C[members] - need, np.inf).min(axis=1)
            u = int(members[np.argmax(fit)])
            for x, old, new in ((v, a, c), (u, c, a)):
                nb = G.neighbours(x)
                C[nb, old] -= 1
                C[nb, new] += 1
                labels[x] = new
            log.append([int(v) + 1, int(u) + 1, int(a) + 1, int(c) + 1])
            done = True
            break
        if not done:
            raise SwapBudgetExhausted(f"vertex {v + 1} fits no other cluster", report={"swap_log": log})
    clusters = [np.flatnonzero(labels == c) for c in range(s)]
    verdicts = {}
    for i, j in R.edges:
        i, j = int(i), int(j)
        Msub = G.adj[np.ix_(clusters[i], clusters[j])]
        ok, wit, details = check_regular_matrix(Msub, eps, mode, samples=samples,
                                                seed=rng.integers(2**32), config=config)
        if wit is not None:
            wit = (clusters[i][wit[0]], clusters[j][wit[1]])
        v = RegularityVerdict((i, j), Fraction(int(Msub.sum()), Msub.size), mode, float(eps), bool(ok), wit,
                              details=details)
        v.delta = float(delta)
        v.min_degree_ok = _min_degree_ok(Msub, delta)
        verdicts[(i, j)] = v
    return ClusterPartition(clusters, R, K, float(eps), float(delta), verdicts, log, mode)


# --------------------------------------------------------------------------
# coloured partitions and cycle-power search


@dataclass
class ColouredPartition:
    """Equipartition of a 2-edge-coloured complete graph with its coloured reduced graph.

    ``colour[i, j]`` is 0 for red and 1 for blue on reduced edges and -1
    on non-edges.
    """

    clusters: list[np.ndarray]
    red_density: np.ndarray
    reduced: np.ndarray
    colour: np.ndarray
    eps: float
    mode: str
    ties: int = 0

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def irregular_pairs(self) -> int:
        k = self.k
        return int(k * (k - 1) // 2 - np.triu(self.reduced, 1).sum())

    @property
    def budget(self) -> float:
        k = self.k
        return self.eps * k * (k - 1) / 2

    def colour_graph(self, colour: int) -> np.ndarray:
        return self.reduced & (self.colour == colour)

    def to_json(self) -> dict:
        k = self.k
        iu = np.triu_indices(k, 1)
        return {
            "k": k,
            "sizes": [len(c) for c in self.clusters],
            "eps": self.eps,
            "mode": self.mode,
            "pairs": [
                {"pair": [int(i) + 1, int(j) + 1], "red_density": float(self.red_density[i, j]),
                 "regular": bool(self.reduced[i, j]),
                 "colour": ["red", "blue"][self.colour[i, j]] if self.reduced[i, j] else None}
                for i, j in zip(*iu)
            ],
            "irregular_pairs": self.irregular_pairs,
            "budget": self.budget,
            "within_budget": self.irregular_pairs <= self.budget + 1e-9,
            "ties_to_red": self.ties,
        }


def coloured_regular_partition(
    red: Graph,
    k: int,
    eps: float,
    seed=None,
    mode: str = "codegree",
    samples: int = 200,
    config: CodegreeConfig | None = None,
) -> ColouredPartition:
    """Random equipartition into ``k`` clusters of a red/blue ``K_N``.

    ``red`` holds the red edges; every other pair is blue.  Cluster sizes
    are ascending and differ by at most one.  A pair becomes a reduced edge
    when its red graph is certified ``eps``-regular in ``mode``; its colour
    is the majority colour with ties going to red.
    """
    N = red.n
    if not 1 <= k <= N:
        raise PreconditionError(f"need 1 <= k <= N, got k={k}, N={N}")
    rng = np.random.default_rng(seed)
    base, extra = divmod(N, k)
    sizes = np.full(k, base)
    sizes[k - extra:] += 1
    perm = rng.permutation(N)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    clusters = [np.sort(perm[bounds[i]:bounds[i + 1]]) for i in range(k)]
    dens = np.zeros((k, k))
    reduced = np.zeros((k, k), dtype=bool)
    colour = np.full((k, k), -1, dtype=np.int64)
    ties = 0
    for i in range(k):
        for j in range(i + 1, k):
            Msub = red.adj[np.ix_(clusters[i], clusters[j])]
            dens[i, j] = dens[j, i] = Msub.mean()
            ok, _, _ = check_regular_matrix(Msub, eps, mode, samples=samples, seed=rng.integers(2**32),
                                            config=config)
            if ok:
                reduced[i, j] = reduced[j, i] = True
                tie = Fraction(int(Msub.sum()), Msub.size) == Fraction(1, 2)
                ties += int(tie)
                c = 0 if 2 * int(Msub.sum()) >= Msub.size else 1
                colour[i, j] = colour[j, i] = c
    return ColouredPartition(clusters, dens, reduced, colour, float(eps), mode, ties)


def is_cycle_power_copy(adj: np.ndarray, seq, r: int) -> bool:
    """Do the distinct vertices ``seq`` carry a copy of ``C_m^r`` in ``adj`` (in cyclic order)?"""
    seq = list(seq)
    m = len(seq)
    if len(set(seq)) != m:
        return False
    for a in range(m):
        for d in range(1, min(r, m - 1) + 1):
            if not adj[seq[a], seq[(a + d) % m]]:
                return False
    return True


def iter_mono_cycle_powers(reduced_colour: np.ndarray, m: int, r: int, node_budget: int = 2_000_000):
    """Yield ordered copies of ``C_m^r`` in the graph ``reduced_colour``.

    Exhaustive backtracking with bitsets: positions are filled in order and
    each new vertex must be adjacent to the previous ``r`` placed vertices
    and, near the end, to the first ones it wraps around to.
    """
    adj = np.asarray(reduced_colour, dtype=bool)
    k = adj.shape[0]
    if m > k:
        return
    nb = [sum(1 << int(u) for u in np.flatnonzero(adj[v])) for v in range(k)]
    full = (1 << k) - 1
    seq: list[int] = []
    nodes = 0

    def candidates() -> int:
        i = len(seq)
        mask = full
        for p, v in enumerate(seq):
            mask &= ~(1 << v)
            gap = i - p
            if min(gap, m - gap) <= r:
                mask &= nb[v]
        return mask

    def rec():
        nonlocal nodes
        if len(seq) == m:
            yield list(seq)
            return
        mask = candidates()
        while mask:
            nodes += 1
            if nodes > node_budget:
                return
            low = mask & -mask
            v = low.bit_length() - 1
            mask ^= low
            seq.append(v)
            yield from rec()
            seq.pop()
            if nodes > node_budget:
                return

    yield from rec()


def find_mono_cycle_power(cp: ColouredPartition | np.ndarray, m: int, r: int, colour=None, node_budget: int = 2_000_000):
    """First monochromatic ``C_m^r`` found, as ``(colour, vertex list)``, or None.

    ``cp`` is a coloured partition or a ``k x k`` colour matrix with -1 on
    non-edges.  Colours are searched red first unless ``colour`` is given.
    The witness is verified before it is returned.
    """
    if m < 2 * r + 1:
        raise PreconditionError(f"need m >= 2r + 1 for a simple cycle power, got m={m}, r={r}")
    cmat = cp.colour if isinstance(cp, ColouredPartition) else np.asarray(cp)
    for c in ([0, 1] if colour is None else [colour]):
        g = cmat == c
        for seq in iter_mono_cycle_powers(g, m, r, node_budget):
            if not is_cycle_power_copy(g, seq, r):
                raise AssertionError("search produced an invalid cycle-power copy")
            return c, seq
    return None
