"""End-to-end orchestration and the constant-chain calculator.

Two pipelines are provided.  :func:`run_bandwidth_pipeline` embeds an
``r``-chromatic guest of small bandwidth into a host of large minimum
degree: guest grid map first, then a host partition with the guest's class
sizes, image restrictions, host augmentation and the blow-up embedding.
:func:`run_ramsey_pipeline` finds a monochromatic copy of the guest in a
2-coloured complete graph through a monochromatic cycle power in the
coloured reduced graph.

Both run in *practical mode*: the user supplies ``eps``, ``delta``, ``xi``
and ``beta`` and every stage is certified by an audit.  *Paper mode* only
evaluates :func:`derive_constant_chain` and reports feasibility.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .backbone import build_Kkr, build_Rkr_path_augmented
from .colouring import colour_along_labelling
from .embedder import EmbedConfig, augment_G_prime, compute_image_restrictions, embed, verify_embedding
from .errors import ArrangeableError, ConstantChainError, InvariantError, PreconditionError, StageFailure
from .graph import Graph, Labelling, cycle_power, equitable_grid, is_proper_colouring
from .partition_h import homomorphism_to_cycle_power, partition_H
from .regularity import (
    ClusterPartition,
    build_host_partition,
    check_super_regular,
    coloured_regular_partition,
    iter_mono_cycle_powers,
)
from .structure import (
    ArrangeabilityCertificate,
    arrangeability_of_order,
    bandwidth_of_labelling,
    heuristic_arrangeability,
    heuristic_bandwidth_labelling,
)

__all__ = [
    "ConstantChainWarning",
    "ConstantChain",
    "derive_constant_chain",
    "PracticalParams",
    "PipelineReport",
    "run_bandwidth_pipeline",
    "ramsey_cycle_length",
    "run_ramsey_pipeline",
]

STAGES_BANDWIDTH = ("labelling", "colouring", "partition_h", "partition_g", "restrict", "augment", "embed")
STAGES_RAMSEY = ("colouring", "partition", "cycle", "homomorphism", "embed")


class ConstantChainWarning(UserWarning):
    """The maximum-degree constant does not dominate the degree bound it must cover."""


# --------------------------------------------------------------------------
# constant chain


@dataclass
class ConstantChain:
    """Constants of the bandwidth theorem with provenance.

    ``values[name]`` is a dict with ``value`` (a float, or None when the
    constant only exists through a cited lemma), ``status`` (``derived``,
    ``override``, ``opaque``) and ``formula``.
    """

    inputs: dict
    values: dict
    warnings: list
    feasibility: dict

    def get(self, name: str):
        return self.values[name]["value"]

    def to_json(self) -> dict:
        return {"inputs": self.inputs, "values": self.values, "warnings": self.warnings,
                "feasibility": self.feasibility}


def _entry(value, status: str, formula: str, note: str | None = None) -> dict:
    out = {"value": value, "status": status, "formula": formula}
    if note:
        out["note"] = note
    return out


def derive_constant_chain(r: int, a: int, gamma: float, overrides: dict | None = None,
                          n: int | None = None) -> ConstantChain:
    """Evaluate the constant chain for ``r``, ``a`` and ``gamma``.

    Parameters
    ----------
    overrides : dict, optional
        Values for the constants that only exist through cited lemmas
        (``d``, ``eps0``, ``eps_prime``, ``alpha_prime``, ``K0``,
        ``xi0``) or user choices (``eps``, ``xi``, ``beta``).
    n : int, optional
        Host size for the feasibility verdict ``beta * n >= 1``.

    Raises
    ------
    ConstantChainError
        When an override breaks one of the chain's inequalities; the
        ``inequality`` attribute names it.

    Examples
    --------
    >>> derive_constant_chain(3, 4, 0.1).get("Delta_R_stated")
    20.0
    """
    if r < 2:
        raise PreconditionError("need r >= 2")
    if not 0 < gamma < 1:
        raise PreconditionError("need 0 < gamma < 1")
    ov = dict(overrides or {})
    known = {"d", "eps0", "eps_prime", "alpha_prime", "K0", "xi0", "eps", "xi", "beta"}
    unknown = set(ov) - known
    if unknown:
        raise PreconditionError(f"unknown overrides {sorted(unknown)}")
    v: dict = {}
    warn_list = []

    v["Delta_R_stated"] = _entry(3 * r + 1 / gamma + 1, "derived", "3r + 1/gamma + 1")
    v["Delta_R_bound"] = _entry(3 * r + 2 / gamma, "derived", "3r + 2/gamma",
                                "degree bound of the augmented reduced graph")
    v["Delta_R"] = _entry(3 * r + 2 / gamma + 1, "derived", "3r + 2/gamma + 1",
                          "value used; strictly above the degree bound")
    if v["Delta_R_bound"]["value"] >= v["Delta_R_stated"]["value"]:
        w = {
            "code": "DELTA_R_DOMINATION",
            "inequality": "3r + 2/gamma < Delta_R",
            "stated_value": v["Delta_R_stated"]["value"],
            "bound": v["Delta_R_bound"]["value"],
            "used": v["Delta_R"]["value"],
            "message": "3r + 2/gamma >= 3r + 1/gamma + 1 whenever gamma <= 1; Delta_R raised to 3r + 2/gamma + 1",
        }
        warn_list.append(w)
        warnings.warn(w["message"], ConstantChainWarning, stacklevel=2)
    v["kappa"] = _entry(2, "derived", "2")

    def opaque_or(name, formula, note):
        if name in ov:
            val = float(ov[name])
            if val <= 0:
                raise ConstantChainError(f"{name} > 0", f"got {val}")
            return _entry(val, "override", formula, note)
        return _entry(None, "opaque", formula, note)

    v["d"] = opaque_or("d", "d(r, gamma)", "density from the host regularity lemma")
    v["delta"] = _entry(v["d"]["value"], v["d"]["status"], "d")
    v["eps0"] = opaque_or("eps0", "eps0(r, gamma)", "from the host regularity lemma")
    v["eps_prime"] = opaque_or("eps_prime", "eps'(C=1, a, Delta_R, kappa, delta/2, c=1/2)", "blow-up constant")
    v["alpha_prime"] = opaque_or("alpha_prime", "alpha'(C=1, a, Delta_R, kappa, delta/2, c=1/2)", "blow-up constant")

    terms = {"1/(2 Delta_R)": 1 / (2 * v["Delta_R"]["value"])}
    if v["eps_prime"]["value"] is not None:
        terms["eps'/2"] = v["eps_prime"]["value"] / 2
    if v["delta"]["value"] is not None:
        terms["delta/2"] = v["delta"]["value"] / 2
    full = v["eps_prime"]["value"] is not None and v["delta"]["value"] is not None
    v["eps_mixed"] = _entry(min(terms.values()) if full else None, "derived" if full else "opaque",
                            "min{eps'/2, 1/(2 Delta_R), delta/2}",
                            None if full else f"upper bound {min(terms.values()):.6g}")
    v["alpha"] = _entry(v["alpha_prime"]["value"], v["alpha_prime"]["status"], "alpha'")

    eps_terms = {"1/4": 0.25}
    if v["eps0"]["value"] is not None:
        eps_terms["eps0"] = v["eps0"]["value"]
    if v["eps_mixed"]["value"] is not None:
        eps_terms["eps_mixed"] = v["eps_mixed"]["value"]
    elif v["eps_mixed"].get("note"):
        eps_terms["1/(2 Delta_R)"] = terms["1/(2 Delta_R)"]
    if "eps" in ov:
        eps = float(ov["eps"])
        for name, bound in eps_terms.items():
            if eps > bound + 1e-15:
                raise ConstantChainError(f"eps <= {name}", f"eps = {eps:g} > {bound:g}")
        v["eps"] = _entry(eps, "override", "min{eps0, 1/4, eps_mixed}")
    else:
        complete = v["eps0"]["value"] is not None and v["eps_mixed"]["value"] is not None
        v["eps"] = _entry(min(eps_terms.values()) if complete else None, "derived" if complete else "opaque",
                          "min{eps0, 1/4, eps_mixed}",
                          None if complete else f"upper bound {min(eps_terms.values()):.6g}")

    v["K0"] = opaque_or("K0", "K0(eps)", "cluster bound from the host regularity lemma")
    xi0 = opaque_or("xi0", "xi0(eps)", "from the host regularity lemma")
    if xi0["value"] is not None and v["K0"]["value"] is not None and v["alpha"]["value"] is not None:
        cap = v["alpha"]["value"] / (2 * r * v["K0"]["value"])
        if xi0["value"] > cap:
            xi0 = _entry(cap, "derived", "min{xi0, alpha/(2 r K0)}", "decreased to alpha/(2 r K0)")
    v["xi0"] = xi0
    if "xi" in ov:
        xi = float(ov["xi"])
        if not 0 < xi:
            raise ConstantChainError("xi > 0", f"got {xi}")
        if xi0["value"] is not None and xi > xi0["value"] + 1e-15:
            raise ConstantChainError("xi <= xi0", f"xi = {xi:g} > xi0 = {xi0['value']:g}")
        v["xi"] = _entry(xi, "override", "xi <= xi0")
    else:
        v["xi"] = _entry(xi0["value"], xi0["status"], "xi0")
    xi = v["xi"]["value"]
    beta_max = xi * xi / (1200 * r) if xi is not None else None
    v["beta_max"] = _entry(beta_max, "derived" if xi is not None else "opaque", "xi^2/(1200 r)")
    if "beta" in ov:
        beta = float(ov["beta"])
        if beta_max is not None and beta > beta_max * (1 + 1e-12):
            raise ConstantChainError("beta <= xi^2/(1200 r)", f"beta = {beta:g} > {beta_max:g}")
        v["beta"] = _entry(beta, "override", "beta <= xi^2/(1200 r)")
    else:
        v["beta"] = _entry(beta_max, v["beta_max"]["status"], "xi^2/(1200 r)")

    beta = v["beta"]["value"]
    feas = {"min_n_for_beta_n_ge_1": math.ceil(1 / beta) if beta else None}
    if n is not None and beta:
        feas.update({"n": n, "beta_n": beta * n, "practical": bool(beta * n >= 1)})
    return ConstantChain(
        inputs={"r": r, "a": a, "gamma": gamma, "overrides": ov, "n": n},
        values=v, warnings=warn_list, feasibility=feas,
    )


# --------------------------------------------------------------------------
# reports


@dataclass
class PracticalParams:
    """Desk-scale parameters shared by both pipelines."""

    eps: float = 0.2
    delta: float = 0.3
    xi: float = 0.1
    beta: float | None = None
    k: int | None = None
    mode: str = "codegree"
    restarts: int = 20
    swap_budget: int = 500
    partition_attempts: int = 5
    strict: bool = False
    reserve: float = 0.05
    floor: float | None = None
    copy_budget: int = 50

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class PipelineReport:
    """Stage outcomes of one pipeline run.

    ``stages`` maps a stage name to its audit block; ``timings`` is kept
    apart so that reports of equal seeds compare equal without it.
    """

    kind: str
    success: bool
    stages: dict
    seeds: dict
    params: dict
    phi: np.ndarray | None = None
    certification: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "success": self.success,
            "stages": self.stages,
            "seeds": self.seeds,
            "params": self.params,
            "certification": self.certification,
            "phi": None if self.phi is None else [int(v) + 1 for v in self.phi],
        }
        if timings:
            out["timings"] = self.timings
        return out


def _stage_seeds(seed, names) -> dict:
    """One independent integer seed per stage, derived from the master seed."""
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: int(c.generate_state(1)[0]) for name, c in zip(names, children)}


class _Stages:
    """Runs named stages, timing them and tagging escaping errors."""

    def __init__(self):
        self.timings: dict = {}

    def run(self, name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except ArrangeableError as exc:
            if not hasattr(exc, "stage"):
                exc.stage = name
            raise
        finally:
            self.timings[name] = time.perf_counter() - t0


def _pick_labelling(H: Graph, seed, labelling: Labelling | None):
    """The given labelling, else the better of the identity and the heuristic."""
    if labelling is not None:
        return labelling, bandwidth_of_labelling(H, labelling).b, "given"
    ident = Labelling.identity(H.n)
    b_id = bandwidth_of_labelling(H, ident).b
    cert = heuristic_bandwidth_labelling(H, seed=seed)
    if cert.b < b_id:
        return cert.labelling, cert.b, "heuristic"
    return ident, b_id, "identity"


def _pick_order(H: Graph, labelling: Labelling) -> ArrangeabilityCertificate:
    """Processing order for the embedder: the labelling unless a heuristic order is strictly better."""
    best = arrangeability_of_order(H, labelling)
    for strategy in ("degeneracy-order", "min-back-degree-last"):
        cand = heuristic_arrangeability(H, strategy)
        if cand.a < best.a:
            best = cand
    return best


# --------------------------------------------------------------------------
# bandwidth pipeline


def run_bandwidth_pipeline(H: Graph, G: Graph, r: int, gamma: float, params: PracticalParams | None = None,
                           seed=None, sigma=None, labelling: Labelling | None = None) -> PipelineReport:
    """Embed ``H`` into ``G`` following the bandwidth theorem's proof order.

    Stages: bandwidth labelling, ``r``-colouring, guest grid map on the
    path-augmented grid ``R_k^r`` with targets ``m_ij``, host partition
    with sizes ``n_ij = |f^{-1}(i, j)|``, image restrictions, host
    augmentation ``G'`` and the blow-up embedding.  The embedding is
    certified against the original ``G``.

    Raises
    ------
    PreconditionError
        Bad input; ``exc.stage`` names the stage.
    StageFailure
        A randomized stage ran out of attempts.
    """
    p = params or PracticalParams()
    n = H.n
    if G.n != n:
        raise PreconditionError(f"host has {G.n} vertices, guest {n}; the embedding is spanning")
    seeds = _stage_seeds(seed, STAGES_BANDWIDTH)
    st = _Stages()
    stages: dict = {}

    need = ((r - 1) / r + gamma) * n
    deg_ok = bool(G.min_degree >= need - 1e-9)
    stages["host"] = {"min_degree": G.min_degree, "required": need, "ok": deg_ok}
    if not deg_ok:
        if p.strict:
            exc = PreconditionError(f"minimum degree {G.min_degree} < ((r-1)/r + gamma) n = {need:g}")
            exc.stage = "host"
            raise exc
        warnings.warn(f"host minimum degree {G.min_degree} is below {need:g}", stacklevel=2)

    L, b, source = st.run("labelling", _pick_labelling, H, seeds["labelling"], labelling)
    beta = p.beta if p.beta is not None else max(b, 1) / n
    stages["labelling"] = {"bandwidth": b, "source": source, "beta": beta}

    def colour():
        if sigma is not None:
            s = np.asarray(sigma, dtype=np.int64)
            if s.min(initial=0) < 0 or s.max(initial=0) > r or not is_proper_colouring(H, s):
                raise PreconditionError(f"supplied colouring is not a proper colouring with colours 0..{r}")
            return s
        return colour_along_labelling(H, L, r)

    sig = st.run("colouring", colour)
    stages["colouring"] = {"class_sizes": np.bincount(sig, minlength=r + 1).tolist()}

    k_max = int(math.floor(1 / (12 * beta * r) + 1e-9))
    k = p.k if p.k is not None else 2
    if k < 2 or k > k_max:
        exc = PreconditionError(f"k = {k} outside [2, {k_max}]: need n/(kr) >= 12 beta n")
        exc.stage = "partition_h"
        raise exc
    R = build_Rkr_path_augmented(k, r)
    K = build_Kkr(k, r)
    m = equitable_grid(n, k, r)
    hmap = st.run("partition_h", partition_H, H, L, sig, R, m, beta, p.xi, strict=p.strict)
    stages["partition_h"] = {"k": k, "audit": hmap.audit, "class_sizes": hmap.class_sizes.tolist(),
                             "X": int(hmap.X.sum()), "cuts": hmap.cuts, "info": hmap.info}

    def partition_g():
        ss = np.random.SeedSequence(seeds["partition_g"])
        last = None
        for attempt, child in enumerate(ss.spawn(p.partition_attempts)):
            part = build_host_partition(G, hmap.class_sizes, R.graph, K.graph, p.eps, p.delta,
                                        seed=child, budget=p.swap_budget, mode=p.mode)
            if part.certified:
                return part, attempt + 1
            last = part
        raise StageFailure("no certified host partition",
                           report={"failed_pairs": [[i + 1, j + 1] for i, j in last.failed_pairs()]})

    part, tries = st.run("partition_g", partition_g)
    stages["partition_g"] = {"attempts": tries, "sizes": part.sizes.tolist(), "swaps": len(part.swap_log),
                             "certified": part.certified, "mode": part.mode,
                             "min_pair_density": float(min(v.density for v in part.verdicts.values()))}

    U = st.run("restrict", compute_image_restrictions, part, G, p.delta, p.eps, X=hmap.X, f=hmap.f)
    stages["restrict"] = {"U_sizes": [len(u) for u in U.U], "cluster_sizes": part.sizes.tolist(), **U.info}
    Gp, aug = st.run("augment", augment_G_prime, G, part, p.delta, p.eps, seed=seeds["augment"], restrictions=U)
    stages["augment"] = aug

    order = _pick_order(H, L)
    cfg = EmbedConfig(floor=p.floor, reserve=p.reserve)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        emb = st.run("embed", embed, H, hmap, part, Gp, U, order, seed=seeds["embed"],
                     restart_budget=p.restarts, config=cfg, delta=p.delta)
    stages["embed"] = {"attempts": emb.attempts, "order_a": order.a, **emb.to_json()["provenance"], **emb.audit}

    ok, viol = verify_embedding(H, G, emb.phi)
    if not ok:
        raise InvariantError(f"embedding uses non-edges of the original host: {viol[:5]}")
    cert = {"verified_against_original": ok, "violations": viol, "edges": H.num_edges}
    return PipelineReport("bandwidth", True, stages, seeds, p.to_json(), emb.phi, cert, st.timings)


# --------------------------------------------------------------------------
# Ramsey pipeline


def ramsey_cycle_length(k: int, r: int) -> int:
    """Largest multiple ``m`` of ``r + 1`` with ``(2r + 3) m <= k``.

    Raises
    ------
    PreconditionError
        If that ``m`` is below ``2r + 1``; the message states the smallest
        admissible ``k``.
    """
    m = (k // (2 * r + 3)) // (r + 1) * (r + 1)
    m_min = -(-(2 * r + 1) // (r + 1)) * (r + 1)
    if m < m_min:
        raise PreconditionError(f"k = {k} too small: need k >= (2r+3) * {m_min} = {(2 * r + 3) * m_min}")
    return m


def default_ramsey_k(r: int) -> int:
    m_min = -(-(2 * r + 1) // (r + 1)) * (r + 1)
    return (2 * r + 3) * m_min


def _trim(host: Graph, clusters: list[np.ndarray], C: Graph, eps: float, r: int):
    """Drop low-degree vertices until every ``C``-pair has minimum degree ``|V_j|/4``.

    The vertex with the worst degree ratio goes first.  Returns the trimmed
    clusters, or None if some cluster would lose more than ``2 r eps |V_i|``.
    """
    clusters = [c.copy() for c in clusters]
    cap = [math.floor(2 * r * eps * len(c)) for c in clusters]
    removed = [0] * len(clusters)
    while True:
        worst = None
        for i, Vi in enumerate(clusters):
            for j in C.neighbours(i):
                Vj = clusters[j]
                ratio = host.adj[np.ix_(Vi, Vj)].sum(axis=1) / max(len(Vj), 1)
                t = int(np.argmin(ratio))
                if ratio[t] < 0.25 and (worst is None or ratio[t] < worst[0]):
                    worst = (ratio[t], i, t)
        if worst is None:
            return clusters, removed
        _, i, t = worst
        removed[i] += 1
        if removed[i] > cap[i] or len(clusters[i]) <= 1:
            return None, removed
        clusters[i] = np.delete(clusters[i], t)


def run_ramsey_pipeline(H: Graph, r: int, colouring=None, N: int | None = None,
                        params: PracticalParams | None = None, seed=None,
                        labelling: Labelling | None = None) -> PipelineReport:
    """Find a monochromatic copy of ``H`` in a 2-coloured ``K_N``.

    Parameters
    ----------
    colouring : Graph or array_like, optional
        The red graph, or an ``N x N`` matrix with 0 for red and 1 for
        blue.  A uniformly random colouring of ``K_N`` is drawn when absent.
    N : int, optional
        Size of the generated colouring; defaults to ``(2r + 4) n``.

    Stages: coloured regular partition into ``k`` clusters, a
    monochromatic ``C_m^r`` in the reduced graph with ``m`` the largest
    multiple of ``r + 1`` with ``(2r + 3) m <= k``, a homomorphism
    ``H -> C_m^r``, trimming to ``(eps, 1/4)``-super-regular pairs and the
    embedding into the chosen colour class.

    Raises
    ------
    StageFailure
        No usable monochromatic cycle power was found within the search
        budget (inconclusive, not a refutation), or the embedding failed.
    """
    p = params or PracticalParams(eps=0.3, delta=0.25)
    n = H.n
    seeds = _stage_seeds(seed, STAGES_RAMSEY)
    st = _Stages()
    stages: dict = {}

    if colouring is None:
        N = N if N is not None else (2 * r + 4) * n
        rng = np.random.default_rng(seeds["colouring"])
        up = np.triu(rng.random((N, N)) < 0.5, 1)
        red = Graph(up | up.T)
        source = "random"
    elif isinstance(colouring, Graph):
        red, source = colouring, "red-graph"
    else:
        cm = np.asarray(colouring)
        if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
            raise PreconditionError("colour matrix must be square")
        red = Graph((cm == 0) & ~np.eye(cm.shape[0], dtype=bool))
        source = "matrix"
    N = red.n
    threshold = (2 * r + 4) * n
    stages["colouring"] = {"N": N, "source": source, "threshold": threshold, "ok": N >= threshold}
    if N < threshold:
        if p.strict:
            exc = PreconditionError(f"N = {N} < (2r+4) n = {threshold}")
            exc.stage = "colouring"
            raise exc
        warnings.warn(f"N = {N} is below (2r+4) n = {threshold}", stacklevel=2)

    k = p.k if p.k is not None else default_ramsey_k(r)
    try:
        m = ramsey_cycle_length(k, r)
    except PreconditionError as exc:
        exc.stage = "partition"
        raise
    if k > N:
        exc = PreconditionError(f"k = {k} clusters exceed N = {N}")
        exc.stage = "partition"
        raise exc
    cp = st.run("partition", coloured_regular_partition, red, k, p.eps, seed=seeds["partition"], mode=p.mode)
    stages["partition"] = {"k": k, "m": m, "irregular_pairs": cp.irregular_pairs, "ties_to_red": cp.ties,
                           "cluster_sizes": sorted({len(c) for c in cp.clusters})}

    if labelling is None:
        L, b, lsource = _pick_labelling(H, seeds["homomorphism"], None)
    else:
        L, b, lsource = labelling, bandwidth_of_labelling(H, labelling).b, "given"
    hmap = st.run("homomorphism", homomorphism_to_cycle_power, H, L, r, m, p.xi)
    stages["homomorphism"] = {"route": hmap.info["route"], "bandwidth": b, "labelling": lsource,
                              "class_sizes": hmap.class_sizes.tolist(), "audit": hmap.audit}

    C = cycle_power(m, r)
    blue = None

    def search():
        nonlocal blue
        seen = 0
        rejected = []
        # search the reduced graph with the largest clusters first
        by_size = np.argsort([-len(c) for c in cp.clusters], kind="stable")
        for colour in (0, 1):
            g = (cp.colour == colour)[np.ix_(by_size, by_size)]
            for found in iter_mono_cycle_powers(g, m, r):
                if seen >= p.copy_budget:
                    break
                seen += 1
                seq = [int(by_size[c]) for c in found]
                if colour == 1 and blue is None:
                    blue = red.complement()
                host = red if colour == 0 else blue
                clusters = [cp.clusters[c] for c in seq]
                trimmed, removed = _trim(host, clusters, C, p.eps, r)
                if trimmed is None:
                    rejected.append({"copy": [c + 1 for c in seq], "reason": "trim-cap"})
                    continue
                sizes = np.array([len(c) for c in trimmed])
                if (hmap.class_sizes > sizes).any():
                    rejected.append({"copy": [c + 1 for c in seq], "reason": "too-small"})
                    continue
                verdicts = {}
                for i, j in C.edges:
                    i, j = int(i), int(j)
                    verdicts[(i, j)] = check_super_regular(host, trimmed[i], trimmed[j], p.eps, 0.25,
                                                           mode=p.mode, seed=seeds["cycle"])
                if not all(v.super_regular for v in verdicts.values()):
                    rejected.append({"copy": [c + 1 for c in seq], "reason": "not-super-regular"})
                    continue
                part = ClusterPartition(trimmed, C, C, p.eps, 0.25, verdicts, [], p.mode)
                info = {"colour": "red" if colour == 0 else "blue", "copy": [c + 1 for c in seq],
                        "removed": removed, "sizes": sizes.tolist(), "examined": seen,
                        "rejected": len(rejected)}
                return colour, host, part, info
        if seen == 0:
            raise StageFailure("no monochromatic C_m^r in the reduced graph (search inconclusive)",
                               report={"m": m, "r": r})
        reasons = {}
        for item in rejected:
            reasons[item["reason"]] = reasons.get(item["reason"], 0) + 1
        raise StageFailure(f"none of {seen} monochromatic C_m^r copies survived trimming",
                           report={"reasons": reasons, "first": rejected[:5]})

    colour, host, part, info = st.run("cycle", search)
    stages["cycle"] = info

    cfg = EmbedConfig(floor=p.floor, reserve=p.reserve)
    order = _pick_order(H, L)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        emb = st.run("embed", embed, H, hmap, part, host, None, order, seed=seeds["embed"],
                     restart_budget=p.restarts, config=cfg, delta=0.25)
    stages["embed"] = {"attempts": emb.attempts, "order_a": order.a, **emb.to_json()["provenance"], **emb.audit}

    ok, viol = verify_embedding(H, host, emb.phi)
    e = H.edges
    red_edges = red.adj[emb.phi[e[:, 0]], emb.phi[e[:, 1]]] if len(e) else np.zeros(0, dtype=bool)
    single = bool(red_edges.all()) if colour == 0 else bool((~red_edges).all())
    if not (ok and single):
        raise InvariantError(f"copy is not monochromatic: {viol[:5]}")
    cert = {"verified_in_colour_class": ok, "single_colour": single, "colour": info["colour"],
            "edges": H.num_edges}
    return PipelineReport("ramsey", True, stages, seeds, p.to_json(), emb.phi, cert, st.timings)
