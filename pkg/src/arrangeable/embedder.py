"""Image restrictions, host augmentation and a randomized blow-up embedder.

The embedder processes guest vertices one at a time.  Every unembedded
guest ``y`` keeps a candidate set: unused host vertices of its target
cluster, inside its image restriction if it has one, adjacent to the images
of all embedded neighbours.  Images are drawn at random among candidates
that leave every unembedded neighbour with a healthy candidate set.  When a
candidate set runs dry, the guests already placed in that cluster are
re-matched (each stays adjacent to all its embedded neighbours), which is
an augmenting-path repair.  A reserved independent set is embedded last by
a maximum bipartite matching per cluster.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import EmbeddingFailure, PartitionError, PreconditionError, StageFailure
from .graph import Graph
from .partition_h import HomomorphismMap
from .regularity import ClusterPartition
from .structure import ArrangeabilityCertificate

__all__ = [
    "ImageRestrictionSet",
    "compute_image_restrictions",
    "augment_G_prime",
    "EmbedConfig",
    "Embedding",
    "embed",
    "verify_embedding",
]


@dataclass
class ImageRestrictionSet:
    """Per-cluster sets ``U_i`` and the restricted guest vertices."""

    U: list[np.ndarray]
    restricted: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def mask(self, n_host: int) -> np.ndarray:
        """Boolean host mask of ``U_0 ∪ ... ∪ U_{s-1}``."""
        out = np.zeros(n_host, dtype=bool)
        for u in self.U:
            out[u] = True
        return out

    def to_json(self) -> dict:
        out = {"U_sizes": [len(u) for u in self.U], "info": self.info}
        if self.restricted is not None:
            out["restricted"] = [int(v) + 1 for v in np.flatnonzero(self.restricted)]
        return out


def compute_image_restrictions(part: ClusterPartition, G: Graph, delta: float, eps: float,
                               X=None, f=None) -> ImageRestrictionSet:
    """``U_i``: vertices of ``V_i`` with at least ``(delta - eps) n_j`` neighbours in every ``V_j``, ``j ∈ N_R(i)``.

    The size bound ``|U_i| >= (1 - Delta(R) eps) |V_i|`` is asserted; when
    ``eps Delta(R) <= 1/2`` this gives ``|U_i| >= |V_i| / 2``.  If ``X`` and
    ``f`` are supplied, the guest vertices of ``X`` are recorded as
    restricted to ``U_{f(x)}``.

    Raises
    ------
    PartitionError
        ``"restriction-size"`` when some ``U_i`` is too small.
    """
    s = part.s
    sizes = part.sizes
    labels = part.labels(G.n)
    inside = labels >= 0
    onehot = np.zeros((G.n, s), dtype=np.int64)
    onehot[np.flatnonzero(inside), labels[inside]] = 1
    C = G.adj.astype(np.int64) @ onehot
    Rdeg = part.R.max_degree
    U = []
    short = []
    for i, Vi in enumerate(part.clusters):
        nb = part.R.neighbours(i)
        ok = np.ones(len(Vi), dtype=bool)
        for j in nb:
            ok &= C[Vi, j] >= (delta - eps) * sizes[j] - 1e-9
        U.append(Vi[ok])
        if len(U[-1]) < (1 - Rdeg * eps) * len(Vi) - 1e-9:
            short.append(i)
    info = {"Delta_R": Rdeg, "bound_factor": 1 - Rdeg * eps, "half_guaranteed": eps * Rdeg <= 0.5}
    if short:
        raise PartitionError("restriction-size", f"clusters {[i + 1 for i in short]} have |U_i| < (1 - Delta_R eps)|V_i|",
                             details={"U_sizes": [len(u) for u in U]})
    restricted = None
    if X is not None:
        restricted = np.asarray(X, dtype=bool).copy()
    return ImageRestrictionSet(U, restricted, info)


def augment_G_prime(G: Graph, part: ClusterPartition, delta: float, eps: float, seed=None,
                    retries: int = 3, restrictions: ImageRestrictionSet | None = None):
    """Add edges so that every ``R``-pair meets the minimum degree ``(delta - eps) n_j``.

    For each pair ``ij`` in ``E(R) \\ E(R*)`` and each vertex ``v`` of
    ``V_i`` with fewer than ``(delta - eps) n_j`` neighbours in ``V_j``,
    edges from ``v`` to ``ceil(delta n_j)`` random non-neighbours in
    ``V_j`` are added (fewer if ``V_j`` runs out).  Returns
    ``(G_prime, report)``; the report holds the audit showing that no
    ``R*``-pair and no ``(U_i, U_j)``-pair changed.
    """
    ss = np.random.SeedSequence(seed)
    if restrictions is None:
        restrictions = compute_image_restrictions(part, G, delta, eps)
    last = None
    for attempt, child in enumerate(ss.spawn(retries)):
        rng = np.random.default_rng(child)
        adj = G.adj.copy()
        added = 0
        deficient = 0
        for i, j in part.R.edges:
            i, j = int(i), int(j)
            if part.R_star.has_edge(i, j):
                continue
            for a, b in ((i, j), (j, i)):
                Va, Vb = part.clusters[a], part.clusters[b]
                nb = len(Vb)
                need = (delta - eps) * nb
                deg = adj[np.ix_(Va, Vb)].sum(axis=1)
                for v in Va[deg < need - 1e-9]:
                    deficient += 1
                    pool = Vb[~adj[v, Vb]]
                    take = min(len(pool), math.ceil(delta * nb - 1e-9))
                    chosen = rng.choice(pool, size=take, replace=False)
                    adj[v, chosen] = True
                    adj[chosen, v] = True
                    added += take
        Gp = Graph(adj)
        ok_deg = True
        for i, j in part.R.edges:
            Vi, Vj = part.clusters[int(i)], part.clusters[int(j)]
            sub = adj[np.ix_(Vi, Vj)]
            if (sub.sum(axis=1) < (delta - eps) * len(Vj) - 1e-9).any() or \
                    (sub.sum(axis=0) < (delta - eps) * len(Vi) - 1e-9).any():
                ok_deg = False
        audit = _augmentation_audit(G, Gp, part, restrictions)
        report = {"attempt": attempt, "added_edges": added, "deficient_vertices": deficient,
                  "min_degree_ok": ok_deg, **audit}
        if not (audit["R_star_unchanged"] and audit["U_pairs_unchanged"]):
            raise PartitionError("augmentation", "augmented graph differs from G on a protected pair",
                                 details=report)
        if ok_deg:
            return Gp, report
        last = report
    raise StageFailure("augmentation left pairs below the minimum degree", report=last)


def _augmentation_audit(G: Graph, Gp: Graph, part: ClusterPartition, restrictions: ImageRestrictionSet) -> dict:
    diff = G.adj ^ Gp.adj
    star_ok = True
    for i, j in part.R_star.edges:
        if diff[np.ix_(part.clusters[int(i)], part.clusters[int(j)])].any():
            star_ok = False
    u_ok = True
    U = restrictions.U
    for i, j in part.R.edges:
        if diff[np.ix_(U[int(i)], U[int(j)])].any():
            u_ok = False
    inside = all(not diff[np.ix_(c, c)].any() for c in part.clusters)
    return {"R_star_unchanged": star_ok, "U_pairs_unchanged": u_ok, "clusters_unchanged": inside,
            "diff_edges": int(np.triu(diff, 1).sum())}


@dataclass(frozen=True)
class EmbedConfig:
    """Tuning knobs of :func:`embed`.

    ``floor`` is the fraction of the cluster size below which a choice is
    said to starve a neighbour; ``reserve`` the fraction of each guest class
    kept for the final matching phase.
    """

    floor: float | None = None
    reserve: float = 0.05
    repair: bool = True


@dataclass
class Embedding:
    phi: np.ndarray
    provenance: list[str]
    attempts: int
    seeds: list[int]
    audit: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "phi": [int(v) + 1 for v in self.phi],
            "provenance": {p: int(sum(1 for q in self.provenance if q == p)) for p in sorted(set(self.provenance))},
            "attempts": self.attempts,
            "audit": self.audit,
        }


def verify_embedding(H: Graph, G: Graph, phi) -> tuple[bool, list]:
    """Is ``phi`` injective with every edge of ``H`` sent to an edge of ``G``?

    Returns ``(ok, violations)``; violations are ``("collision", image,
    guests)`` and ``("edge", u, v)`` tuples with 1-based ids.
    """
    phi = np.asarray(phi, dtype=np.int64)
    out = []
    if len(phi) != H.n:
        return False, [("length", len(phi), H.n)]
    if (phi < 0).any() or (phi >= G.n).any():
        return False, [("range", int(phi.min()), int(phi.max()))]
    vals, counts = np.unique(phi, return_counts=True)
    for v in vals[counts > 1]:
        out.append(("collision", int(v) + 1, [int(x) + 1 for x in np.flatnonzero(phi == v)]))
    e = H.edges
    if len(e):
        bad = ~G.adj[phi[e[:, 0]], phi[e[:, 1]]]
        for u, v in e[bad]:
            out.append(("edge", int(u) + 1, int(v) + 1))
    return not out, out


def _check_map(H: Graph, cluster_of: np.ndarray, part: ClusterPartition, X: np.ndarray) -> None:
    e = H.edges
    if len(e) == 0:
        return
    cu, cv = cluster_of[e[:, 0]], cluster_of[e[:, 1]]
    if (~part.R.adj[cu, cv]).any():
        u, v = e[~part.R.adj[cu, cv]][0]
        raise PreconditionError(f"edge {u + 1}-{v + 1} is not mapped onto an edge of R")
    loose = ~part.R_star.adj[cu, cv] & ~(X[e[:, 0]] & X[e[:, 1]])
    if loose.any():
        u, v = e[loose][0]
        raise PreconditionError(f"edge {u + 1}-{v + 1} uses a non-spine pair but is not inside X")


def _choose_reserve(H: Graph, order: np.ndarray, cluster_of: np.ndarray, X: np.ndarray, s: int, frac: float) -> np.ndarray:
    reserved = np.zeros(H.n, dtype=bool)
    blocked = np.zeros(H.n, dtype=bool)
    quota = np.ceil(frac * np.bincount(cluster_of, minlength=s)).astype(np.int64)
    got = np.zeros(s, dtype=np.int64)
    for y in order[::-1]:
        c = cluster_of[y]
        if got[c] >= quota[c] or X[y] or blocked[y]:
            continue
        reserved[y] = True
        got[c] += 1
        blocked[y] = True
        blocked[H.neighbours(y)] = True
    return reserved


class _Attempt:
    """State of one embedding attempt."""

    def __init__(self, H, host, cluster_of, part, restr_mask, X, rng, floor_frac):
        self.H = H
        self.A = host.adj
        self.cluster_of = cluster_of
        self.part = part
        self.rng = rng
        n_h, n_g = H.n, host.n
        self.phi = np.full(n_h, -1, dtype=np.int64)
        self.used = np.zeros(n_g, dtype=bool)
        self.prov = ["" for _ in range(n_h)]
        cmask = np.zeros((part.s, n_g), dtype=bool)
        for i, c in enumerate(part.clusters):
            cmask[i, c] = True
        self.base = cmask[cluster_of]
        if X.any():
            self.base[X] &= restr_mask[None, :]
        self.cand = self.base.copy()
        self.sizes = part.sizes
        self.floor_frac = floor_frac
        self.repairs = 0

    def place(self, y: int, h: int, how: str) -> None:
        self.phi[y] = h
        self.used[h] = True
        self.prov[y] = how
        for u in self.H.neighbours(y):
            if self.phi[u] < 0:
                self.cand[u] &= self.A[h]

    def compat_row(self, z: int) -> np.ndarray:
        """Hosts allowed for ``z`` given all its embedded neighbours (ignores usage)."""
        row = self.base[z].copy()
        for w in self.H.neighbours(z):
            if self.phi[w] >= 0:
                row &= self.A[self.phi[w]]
        return row

    def choose(self, y: int) -> int | None:
        options = np.flatnonzero(self.cand[y] & ~self.used)
        if len(options) == 0:
            return None
        nbrs = [u for u in self.H.neighbours(y) if self.phi[u] < 0]
        if nbrs:
            free = ~self.used
            scores = np.full(len(options), np.iinfo(np.int64).max, dtype=np.int64)
            floors = []
            for u in nbrs:
                cu = self.cand[u] & free
                cnt = self.A[np.ix_(options, np.flatnonzero(cu))].sum(axis=1)
                scores = np.minimum(scores, cnt)
                floors.append(self.floor_frac * self.sizes[self.cluster_of[u]])
            floor = min(floors)
            good = options[scores >= floor]
            if len(good):
                return int(self.rng.choice(good))
            best = options[scores == scores.max()]
            return int(self.rng.choice(best))
        return int(self.rng.choice(options))

    def rematch(self, c: int, newcomers, how: str):
        """Maximum matching of cluster ``c``'s embedded guests plus ``newcomers``.

        Every guest may move to any host of the cluster adjacent to the
        images of all its embedded neighbours, so augmenting paths run
        through guests placed earlier.  Returns ``None`` on success and the
        compatibility matrix with the partial matching otherwise.
        """
        hosts = self.part.clusters[c]
        placed = np.flatnonzero((self.cluster_of == c) & (self.phi >= 0))
        newcomers = np.asarray(newcomers, dtype=np.int64)
        guests = np.concatenate([placed, newcomers])
        rows = np.array([self.compat_row(int(z))[hosts] for z in guests])
        match = maximum_bipartite_matching(sp.csr_matrix(rows.astype(np.int8)), perm_type="column")
        if (match < 0).any():
            return rows, match
        self.used[self.phi[placed]] = False
        for z, col in zip(guests, match):
            z = int(z)
            old = self.phi[z]
            self.phi[z] = hosts[col]
            self.used[hosts[col]] = True
            if old < 0:
                self.prov[z] = how
            elif old != hosts[col]:
                self.prov[z] = "repair"
        touched = set()
        for z in guests:
            touched.update(int(u) for u in self.H.neighbours(int(z)) if self.phi[u] < 0)
        for u in touched:
            self.cand[u] = self.compat_row(u)
        self.repairs += 1
        return None

    def repair(self, y: int) -> bool:
        """Re-match ``y``'s cluster to make room for ``y``."""
        if not self.compat_row(y).any():
            return False
        return self.rematch(int(self.cluster_of[y]), [y], "repair") is None


def embed(
    H: Graph,
    hmap: HomomorphismMap,
    part: ClusterPartition,
    host: Graph,
    restrictions: ImageRestrictionSet | None = None,
    order: ArrangeabilityCertificate | None = None,
    seed=None,
    restart_budget: int = 20,
    config: EmbedConfig | None = None,
    delta: float | None = None,
) -> Embedding:
    """Embed ``H`` into ``host`` with ``phi(W_i) ⊆ V_i``.

    Parameters
    ----------
    hmap : HomomorphismMap
        ``hmap.f[x]`` is the cluster index of guest ``x``; ``hmap.X`` marks
        the vertices that must land in their cluster's ``U``.
    part : ClusterPartition
        Host clusters with reduced graph ``R`` and spine ``R_star``.
    host : Graph
        Graph whose edges may be used (usually the augmented ``G'``).
    order : ArrangeabilityCertificate, optional
        Processing order of the guest vertices; natural order by default.
    delta : float, optional
        Sets the default candidate floor ``delta / 2``.

    Raises
    ------
    EmbeddingFailure
        After ``restart_budget`` failed attempts; ``report`` holds the
        stuck vertex and candidate trace of each attempt.
    """
    config = config or EmbedConfig()
    cluster_of = np.asarray(hmap.f, dtype=np.int64)
    X = np.asarray(hmap.X, dtype=bool) if hmap.X is not None else np.zeros(H.n, dtype=bool)
    s = part.s
    if cluster_of.max(initial=-1) >= s:
        raise PreconditionError("map refers to more clusters than the partition has")
    W = np.bincount(cluster_of, minlength=s)
    if (W > part.sizes).any():
        i = int(np.flatnonzero(W > part.sizes)[0])
        raise PreconditionError(f"class {i + 1} has {W[i]} guests but cluster holds {part.sizes[i]}")
    _check_map(H, cluster_of, part, X)
    advisory = {}
    if H.n > 2:
        limit = math.sqrt(H.n) / math.log(H.n)
        advisory = {"max_degree": H.max_degree, "limit": limit, "ok": H.max_degree <= limit}
        if H.max_degree > limit:
            warnings.warn(f"Delta(H) = {H.max_degree} exceeds sqrt(n)/log(n) = {limit:.2f}", stacklevel=2)
    if restrictions is not None:
        restr_mask = restrictions.mask(host.n)
    else:
        restr_mask = np.ones(host.n, dtype=bool)
    base_order = order.ordering.order if order is not None else np.arange(H.n)
    reserved = _choose_reserve(H, base_order, cluster_of, X, s, config.reserve)
    seq = np.concatenate([base_order[X[base_order]], base_order[~X[base_order] & ~reserved[base_order]]])
    floor_frac = config.floor if config.floor is not None else (delta / 2 if delta is not None else 0.0)

    ss = np.random.SeedSequence(seed)
    trace = []
    seeds = []
    for attempt, child in enumerate(ss.spawn(restart_budget)):
        seeds.append(int(child.generate_state(1)[0]))
        rng = np.random.default_rng(child)
        st = _Attempt(H, host, cluster_of, part, restr_mask, X, rng, floor_frac)
        stuck = None
        for y in seq:
            y = int(y)
            h = st.choose(y)
            if h is None and config.repair and st.repair(y):
                continue
            if h is None:
                stuck = {"attempt": attempt, "vertex": y + 1, "phase": "greedy",
                         "cluster": int(cluster_of[y]) + 1,
                         "candidates": int(st.cand[y].sum()),
                         "free_in_cluster": int((~st.used[part.clusters[cluster_of[y]]]).sum())}
                break
            st.place(y, h, "greedy")
        if stuck is None:
            stuck = _matching_phase(st, H, reserved, part, cluster_of, attempt)
        if stuck is None:
            phi = st.phi
            ok, viol = verify_embedding(H, host, phi)
            if not ok:
                raise AssertionError(f"embedder produced an invalid map: {viol[:5]}")
            audit = _embedding_audit(H, phi, cluster_of, part, X, restr_mask)
            audit.update({"repairs": st.repairs, "reserved": int(reserved.sum()), "degree_advisory": advisory})
            return Embedding(phi, st.prov, attempt + 1, seeds, audit, trace)
        trace.append(stuck)
    raise EmbeddingFailure(f"no embedding after {restart_budget} attempts",
                           report={"attempts": trace, "degree_advisory": advisory})


def _hall_violation(rows: np.ndarray, match: np.ndarray) -> dict:
    """Alternating search from unmatched rows: returns a set ``S`` with ``|N(S)| < |S|``."""
    n_rows = rows.shape[0]
    col_owner = {int(c): i for i, c in enumerate(match) if c >= 0}
    free = [i for i in range(n_rows) if match[i] < 0]
    S, N = set(free), set()
    stack = list(free)
    while stack:
        i = stack.pop()
        for c in np.flatnonzero(rows[i]):
            c = int(c)
            if c in N:
                continue
            N.add(c)
            j = col_owner.get(c)
            if j is not None and j not in S:
                S.add(j)
                stack.append(j)
    return {"S": len(S), "N(S)": len(N)}


def _matching_phase(st: _Attempt, H: Graph, reserved: np.ndarray, part: ClusterPartition,
                    cluster_of: np.ndarray, attempt: int):
    """Place the reserved guests of each cluster by a maximum matching over the whole cluster."""
    for c in range(part.s):
        guests = np.flatnonzero(reserved & (cluster_of == c))
        if len(guests) == 0:
            continue
        hosts = part.clusters[c][~st.used[part.clusters[c]]]
        direct = st.cand[np.ix_(guests, hosts)]
        match = maximum_bipartite_matching(sp.csr_matrix(direct.astype(np.int8)), perm_type="column")
        if not (match < 0).any():
            for y, col in zip(guests, match):
                st.place(int(y), int(hosts[col]), "matching")
            continue
        failed = st.rematch(c, guests, "matching")
        if failed is not None:
            rows, m2 = failed
            return {"attempt": attempt, "phase": "matching", "cluster": c + 1,
                    "guests": len(guests), "hosts": len(hosts), "hall": _hall_violation(rows, m2)}
    return None


def _embedding_audit(H, phi, cluster_of, part, X, restr_mask) -> dict:
    labels = part.labels(len(restr_mask))
    in_cluster = bool((labels[phi] == cluster_of).all())
    restricted_ok = bool(restr_mask[phi[X]].all()) if X.any() else True
    e = H.edges
    if len(e):
        cu, cv = cluster_of[e[:, 0]], cluster_of[e[:, 1]]
        outside_x = ~(X[e[:, 0]] & X[e[:, 1]])
        spine_ok = bool(part.R_star.adj[cu[outside_x], cv[outside_x]].all())
    else:
        spine_ok = True
    return {"clusters_respected": in_cluster, "restrictions_respected": restricted_ok,
            "spine_discipline": spine_ok}
