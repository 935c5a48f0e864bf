"""Block structure, zero-free and balanced colourings, colour switching.

Colourings are integer arrays indexed by vertex with values in ``{0..r}``.
Block and window arithmetic is done in *label space*: the position of a
vertex under a bandwidth labelling.  All positions are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ColouringError, PreconditionError
from .graph import Graph, Labelling, is_proper_colouring

__all__ = [
    "BlockStructure",
    "build_blocks",
    "block_zero_mask",
    "is_zero_free_colouring",
    "is_balanced",
    "is_balanced_bruteforce",
    "even_out_check",
    "switch_colours",
    "apply_block_permutation",
    "balance_colouring",
    "BalanceReport",
    "colour_along_labelling",
    "colour_report",
]

_TOL = 1e-9


@dataclass(frozen=True)
class BlockStructure:
    """Consecutive position intervals ``[starts[t], ends[t])``.

    ``length`` is the nominal block length; the final block may be shorter.
    """

    n: int
    r: int
    beta: float
    length: int
    starts: np.ndarray
    ends: np.ndarray

    @property
    def count(self) -> int:
        return len(self.starts)

    def block_of(self, positions) -> np.ndarray:
        """Block index of each position."""
        return np.asarray(positions) // self.length

    def sizes(self) -> np.ndarray:
        return self.ends - self.starts

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "beta": self.beta,
            "block_length": self.length,
            "blocks": [[int(s) + 1, int(e)] for s, e in zip(self.starts, self.ends)],
        }


def beta_n(beta: float, n: int) -> int:
    """``floor(beta * n)`` robust to representation error."""
    return int(math.floor(beta * n + _TOL))


def build_blocks(n: int, r: int, beta: float) -> BlockStructure:
    """Blocks of length ``floor(4 r beta n)``; the last one may be shorter.

    Examples
    --------
    >>> build_blocks(100, 2, 1 / 40).count
    5
    """
    length = int(math.floor(4 * r * beta * n + _TOL))
    if length < 1:
        raise PreconditionError(f"block length 4*r*beta*n = {4 * r * beta * n:g} is below 1")
    starts = np.arange(0, n, length, dtype=np.int64)
    ends = np.minimum(starts + length, n)
    return BlockStructure(n, r, float(beta), length, starts, ends)


def _in_label_space(sigma, labelling: Labelling | None) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    return sigma if labelling is None else sigma[labelling.order]


def _to_vertex_space(tau: np.ndarray, labelling: Labelling | None) -> np.ndarray:
    if labelling is None:
        return tau.copy()
    out = np.empty_like(tau)
    out[labelling.order] = tau
    return out


def block_zero_mask(sigma, blocks: BlockStructure, labelling: Labelling | None = None) -> np.ndarray:
    """Boolean array: does block ``t`` contain a vertex of colour 0?"""
    tau = _in_label_space(sigma, labelling)
    zero_pos = np.flatnonzero(tau == 0)
    mask = np.zeros(blocks.count, dtype=bool)
    mask[blocks.block_of(zero_pos)] = True
    return mask


def is_zero_free_colouring(sigma, blocks: BlockStructure, ell: int, labelling: Labelling | None = None) -> bool:
    """Every ``ell`` consecutive blocks contain at most one block with zeros.

    With fewer than ``ell`` blocks the whole sequence is the only window.
    """
    if ell < 1:
        raise ValueError("ell must be positive")
    z = block_zero_mask(sigma, blocks, labelling).astype(np.int64)
    width = min(ell, len(z))
    if width == 0:
        return True
    windows = np.convolve(z, np.ones(width, dtype=np.int64), mode="valid")
    return bool(windows.max() <= 1)


def is_balanced(sigma, r: int, x: float, labelling: Labelling | None = None) -> bool:
    """``x``-balance via prefix extrema in ``O(n r)``.

    For colour ``i`` let ``D_i(t) = r * #{p < t : colour i} - t``.  Every
    interval count lies within ``x`` of its share exactly when the largest
    rise and the largest fall of ``D_i`` are at most ``r * x``.
    """
    tau = _in_label_space(sigma, labelling)
    if (tau == 0).sum() > x + _TOL:
        return False
    n = len(tau)
    t = np.arange(n + 1)
    onehot = tau[:, None] == np.arange(1, r + 1)[None, :]
    prefix = np.vstack([np.zeros((1, r), dtype=np.int64), np.cumsum(onehot, axis=0)])
    D = r * prefix - t[:, None]
    rise = (D - np.minimum.accumulate(D, axis=0)).max()
    fall = (np.maximum.accumulate(D, axis=0) - D).max()
    return bool(max(rise, fall) <= r * x + _TOL)


def is_balanced_bruteforce(sigma, r: int, x: float, labelling: Labelling | None = None) -> bool:
    """All-pairs definition of ``x``-balance; quadratic, for testing."""
    tau = _in_label_space(sigma, labelling)
    if (tau == 0).sum() > x + _TOL:
        return False
    n = len(tau)
    for i in range(1, r + 1):
        for a in range(n):
            count = 0
            for b in range(a + 1, n + 1):
                count += tau[b - 1] == i
                share = (b - a) / r
                if not (share - x - _TOL <= count <= share + x + _TOL):
                    return False
    return True


def even_out_check(c, c_prime, x) -> bool:
    """Check the even-out conclusion ``max(c + c') <= min(c + c') + x``.

    ``c`` must be ascending with spread at most ``x`` and ``c_prime``
    descending with spread at most ``x``.
    """
    c = np.asarray(c)
    cp = np.asarray(c_prime)
    if c.shape != cp.shape or c.ndim != 1 or len(c) == 0:
        raise PreconditionError("c and c' must be vectors of equal positive length")
    if (np.diff(c) < 0).any() or c[-1] > c[0] + x:
        raise PreconditionError("c must be ascending with c_r <= c_1 + x")
    if (np.diff(cp) > 0).any() or cp[0] > cp[-1] + x:
        raise PreconditionError("c' must be descending with c'_1 <= c'_r + x")
    s = c + cp
    return bool(s.max() <= s.min() + x)


def _switch_label_space(tau: np.ndarray, s: int, l: int, lp: int, w: int) -> np.ndarray:
    n = len(tau)
    lo, hi = max(0, s - 2 * w), min(n - 1, s + 2 * w)
    if (tau[lo:hi + 1] == 0).any():
        raise ColouringError(f"window [{lo}, {hi}] around s={s} is not zero free")
    pos = np.arange(n)
    out = tau.copy()
    zero = (tau == l) & (pos >= s - w) & (pos <= s + w)
    out[(tau == lp) & (pos > s)] = l
    out[(tau == l) & (pos > s + w)] = lp
    out[zero] = 0
    return out


def switch_colours(H: Graph, labelling: Labelling, sigma, s: int, l: int, l_prime: int, beta: float) -> np.ndarray:
    """Exchange colours ``l`` and ``l_prime`` to the right of position ``s``.

    With ``w = floor(beta n)``: vertices of colour ``l_prime`` beyond ``s``
    become ``l``, vertices of colour ``l`` beyond ``s + w`` become
    ``l_prime``, and vertices of colour ``l`` within ``w`` of ``s`` become 0.
    The zero case wins when ``l == l_prime``.  The result is checked for
    properness before it is returned.

    Parameters
    ----------
    s : int
        0-based label position.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    n = H.n
    w = beta_n(beta, n)
    if not is_proper_colouring(H, sigma):
        raise ColouringError("input colouring is not proper")
    tau = _switch_label_space(sigma[labelling.order], s, l, l_prime, w)
    out = _to_vertex_space(tau, labelling)
    if not is_proper_colouring(H, out):
        raise ColouringError("switch produced an improper colouring; bandwidth exceeds beta*n")
    return out


def _transpositions(perm: np.ndarray) -> list[tuple[int, int]]:
    """Transpositions ``t_1, ..., t_q`` with ``perm = t_q o ... o t_1``, ``q <= r - 1``.

    ``perm`` maps colour index ``c`` (0-based) to ``perm[c]``.
    """
    r = len(perm)
    cur = np.arange(r)  # cur = composition applied so far
    out = []
    for c in range(r):
        # find colour currently sent to perm[c] and swap images
        if cur[c] != perm[c]:
            d = int(np.flatnonzero(cur == perm[c])[0])
            a, b = int(cur[c]), int(cur[d])
            out.append((a, b))
            cur[c], cur[d] = b, a
    return out


def _apply_perm_label_space(tau, start, end, perm, w, r) -> np.ndarray:
    """Realise ``perm`` (1-based colours) after a block ``[start, end)``."""
    p0 = np.asarray(perm, dtype=np.int64) - 1
    trans = _transpositions(p0)
    if not trans:
        return tau.copy()
    need = 4 * w + (len(trans) - 1) * (3 * w + 1)
    if need > end - start - 1:
        raise PreconditionError(
            f"block of length {end - start} too short for {len(trans)} switches with beta*n={w}"
        )
    out = tau
    for q, (a, b) in enumerate(trans):
        s = start + 2 * w + q * (3 * w + 1)
        out = _switch_label_space(out, s, a + 1, b + 1, w)
    return out


def apply_block_permutation(H: Graph, labelling: Labelling, sigma, blocks: BlockStructure, t: int, perm, beta: float) -> np.ndarray:
    """Apply the colour permutation ``perm`` to everything after block ``t``.

    ``perm`` is a sequence of length ``r`` with ``perm[c - 1]`` the new
    colour of old colour ``c``.  The permutation is written as at most
    ``r - 1`` transpositions, each realised by :func:`switch_colours` on
    its own sub-interval of block ``t``, so all new zeros lie inside it.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    r = blocks.r
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(1, r + 1)):
        raise ValueError("perm must be a permutation of 1..r")
    tau = sigma[labelling.order]
    start, end = int(blocks.starts[t]), int(blocks.ends[t])
    if (tau[start:end] == 0).any():
        raise ColouringError(f"block {t} is not zero free")
    w = beta_n(beta, H.n)
    out_tau = _apply_perm_label_space(tau, start, end, perm, w, r)
    out = _to_vertex_space(out_tau, labelling)
    if not is_proper_colouring(H, out):
        raise ColouringError("block permutation produced an improper colouring")
    lut = np.concatenate([[0], perm])
    assert np.array_equal(out_tau[:start], tau[:start])
    assert np.array_equal(out_tau[end:], lut[tau[end:]])
    return out


@dataclass
class BalanceReport:
    switching_blocks: list[int]
    permutations: list[list[int]]
    spread_trace: list[int] = field(default_factory=list)
    ell: int = 0
    xi_n: float = 0.0

    def to_json(self) -> dict:
        return {
            "switching_blocks": [t + 1 for t in self.switching_blocks],
            "permutations": self.permutations,
            "spread_trace": self.spread_trace,
            "ell": self.ell,
            "xi_n": self.xi_n,
        }


def _choose_switching_blocks(zero_blocks: np.ndarray, ell: int) -> list[int]:
    """Earliest zero-free blocks at distance at least ``ell`` from every special block."""
    specials = list(np.flatnonzero(zero_blocks))
    chosen: list[int] = []
    for t in range(len(zero_blocks)):
        if zero_blocks[t]:
            continue
        if chosen and t - chosen[-1] < ell:
            continue
        if any(abs(t - z) < ell for z in specials):
            continue
        chosen.append(t)
    return chosen


def balance_colouring(
    H: Graph,
    labelling: Labelling,
    sigma,
    r: int,
    ell: int,
    beta: float,
    strict: bool = True,
    return_report: bool = False,
):
    """Turn a ``(2 ell, beta)``-zero-free colouring into a balanced one.

    Switching blocks are chosen greedily from the left so that no window of
    ``ell`` blocks holds two special blocks (zero blocks of the input or
    switching blocks).  At each switching block the colour classes of the
    following segment are permuted so that the currently rarest colour
    receives the segment's most frequent class.

    The output is verified to be proper, ``(ell, beta)``-zero free and
    ``6 n / ell``-balanced before it is returned.

    Parameters
    ----------
    strict : bool
        Enforce ``beta <= xi^2 / (12 r)`` with ``xi = 1 / ell``.  Practical
        runs switch it off and rely on the output verification.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    n = H.n
    xi = 1.0 / ell
    if strict and beta > xi * xi / (12 * r) + _TOL:
        raise PreconditionError(f"beta={beta:g} exceeds xi^2/(12r)={xi * xi / (12 * r):g}")
    if not is_proper_colouring(H, sigma):
        raise ColouringError("input colouring is not proper")
    if sigma.min(initial=0) < 0 or sigma.max(initial=0) > r:
        raise ColouringError(f"colours must lie in 0..{r}")
    blocks = build_blocks(n, r, beta)
    if not is_zero_free_colouring(sigma, blocks, 2 * ell, labelling):
        raise ColouringError(f"input colouring is not ({2 * ell}, beta)-zero free")
    w = beta_n(beta, n)
    tau = sigma[labelling.order].copy()
    zero_blocks = block_zero_mask(tau, blocks)
    switching = _choose_switching_blocks(zero_blocks, ell)
    T = blocks.count
    # every run of 3*ell blocks must meet a switching block
    edges = [-1] + switching + [T]
    if max(np.diff(edges)) > 3 * ell:
        raise ColouringError("no admissible switching block in some window of 3*ell blocks")

    report = BalanceReport(switching, [], [], ell, xi * n)
    colours = np.arange(1, r + 1)
    for idx, s in enumerate(switching):
        seg_end = int(blocks.starts[switching[idx + 1]]) if idx + 1 < len(switching) else n
        before = tau[: int(blocks.starts[s])]
        c = (before[:, None] == colours).sum(axis=0)
        report.spread_trace.append(int(c.max() - c.min()))
        seg = tau[int(blocks.ends[s]):seg_end]
        c_tilde = (seg[:, None] == colours).sum(axis=0)
        old_sorted = np.argsort(-c_tilde, kind="stable")  # most frequent first
        new_sorted = np.argsort(c, kind="stable")  # rarest first
        perm = np.empty(r, dtype=np.int64)
        perm[old_sorted] = new_sorted + 1
        report.permutations.append(perm.tolist())
        if np.array_equal(perm, colours):
            continue
        tau = _apply_perm_label_space(tau, int(blocks.starts[s]), int(blocks.ends[s]), perm, w, r)
    c = (tau[:, None] == colours).sum(axis=0)
    report.spread_trace.append(int(c.max() - c.min()))

    out = _to_vertex_space(tau, labelling)
    if not is_proper_colouring(H, out):
        raise ColouringError("balanced colouring is not proper")
    if not is_zero_free_colouring(out, blocks, ell, labelling):
        raise ColouringError(f"balanced colouring is not ({ell}, beta)-zero free")
    if not is_balanced(out, r, 6 * n / ell, labelling):
        raise ColouringError(f"balanced colouring is not {6 * n / ell:g}-balanced")
    return (out, report) if return_report else out


def colour_along_labelling(H: Graph, labelling: Labelling, r: int, max_states: int = 4096) -> np.ndarray:
    """Proper colouring with colours ``1..r`` following a bandwidth labelling.

    When ``r ** b`` (``b`` the bandwidth of the labelling) is at most
    ``max_states`` a dynamic programme over the colours of the last ``b``
    positions decides ``r``-colourability exactly.  Among the colours that
    keep a completion possible it picks the least used one so far, which
    keeps classes close in size.  Larger instances fall back to greedy.

    Raises
    ------
    ColouringError
        If no proper ``r``-colouring is found.
    """
    n = H.n
    order = labelling.order
    pos = labelling.position
    A = H.adj[np.ix_(order, order)]
    e = H.edges
    b = int(np.abs(pos[e[:, 0]] - pos[e[:, 1]]).max()) if len(e) else 0
    tau = np.zeros(n, dtype=np.int64)
    counts = np.zeros(r + 1, dtype=np.int64)
    if b == 0:
        for p in range(n):
            c = int(np.argmin(counts[1:])) + 1
            tau[p] = c
            counts[c] += 1
        return _to_vertex_space(tau, labelling)
    n_states = r ** b
    if n_states <= max_states:
        # state = colours of positions p-b..p-1 (0-based digits), most recent last
        states = np.arange(n_states)
        digits = np.stack([(states // r ** (b - 1 - d)) % r for d in range(b)], axis=1)
        back_mask = np.zeros((n, b), dtype=bool)  # back_mask[p, d]: p adjacent to p-b+d
        for d in range(b):
            lag = b - d
            idx = np.arange(lag, n)
            back_mask[idx, d] = A[idx, idx - lag]
        good = np.zeros((n + 1, n_states), dtype=bool)
        good[n] = True
        for p in range(n - 1, -1, -1):
            acc = np.zeros(n_states, dtype=bool)
            for c in range(r):
                clash = (digits[:, back_mask[p]] == c).any(axis=1)
                acc |= ~clash & good[p + 1][(states * r + c) % n_states]
            good[p] = acc
        if not good[0, 0]:
            raise ColouringError(f"graph is not {r}-colourable")
        state = 0
        for p in range(n):
            row = digits[state]
            best = None
            for c in sorted(range(r), key=lambda c: (counts[c + 1], c)):
                if (row[back_mask[p]] == c).any():
                    continue
                nxt = (state * r + c) % n_states
                if good[p + 1][nxt]:
                    best = (c, nxt)
                    break
            c, state = best
            tau[p] = c + 1
            counts[c + 1] += 1
        return _to_vertex_space(tau, labelling)
    for p in range(n):
        nb = np.flatnonzero(A[p, :p])
        used = set(tau[nb].tolist())
        free = [c for c in range(1, r + 1) if c not in used]
        if not free:
            raise ColouringError(f"greedy colouring along the labelling needs more than {r} colours")
        c = min(free, key=lambda c: (counts[c], c))
        tau[p] = c
        counts[c] += 1
    return _to_vertex_space(tau, labelling)


def colour_report(H: Graph, labelling: Labelling, sigma, r: int, beta: float, ell: int) -> dict:
    """Properness, zero-freeness and balance slack of a colouring."""
    sigma = np.asarray(sigma, dtype=np.int64)
    blocks = build_blocks(H.n, r, beta)
    tau = sigma[labelling.order]
    colours = np.arange(1, r + 1)
    onehot = tau[:, None] == colours[None, :]
    prefix = np.vstack([np.zeros((1, r), dtype=np.int64), np.cumsum(onehot, axis=0)])
    D = r * prefix - np.arange(H.n + 1)[:, None]
    rise = (D - np.minimum.accumulate(D, axis=0)).max() if H.n else 0
    fall = (np.maximum.accumulate(D, axis=0) - D).max() if H.n else 0
    slack = max(rise, fall) / r
    return {
        "proper": is_proper_colouring(H, sigma),
        "zero_free": is_zero_free_colouring(sigma, blocks, ell, labelling),
        "ell": ell,
        "zero_blocks": [int(t) + 1 for t in np.flatnonzero(block_zero_mask(sigma, blocks, labelling))],
        "zeros": int((sigma == 0).sum()),
        "balance_slack": float(max(slack, (sigma == 0).sum())),
        "class_sizes": [int((sigma == c).sum()) for c in range(r + 1)],
    }
