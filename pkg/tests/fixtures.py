"""Fixture suites shared by the module tests and the acceptance run."""

from __future__ import annotations

import numpy as np

from arrangeable.graph import Labelling, cycle_power, empty, path_power, random_bandwidth


def zigzag(n: int) -> Labelling:
    """Labelling 0, n-1, 1, n-2, ... giving C_n^r bandwidth 2r."""
    lo, hi = 0, n - 1
    order = []
    while lo <= hi:
        order.append(lo)
        if lo != hi:
            order.append(hi)
        lo, hi = lo + 1, hi - 1
    return Labelling(np.array(order))


def lemma_h_suite():
    """(name, H, labelling, r, k) with n in [240, 2400]; 24 instances."""
    out = []
    for n in (240, 600, 1200, 2400):
        ident = Labelling.identity(n)
        out.append((f"P{n}^1-k2", path_power(n, 1), ident, 2, 2))
        out.append((f"P{n}^2-k2", path_power(n, 2), ident, 3, 2))
        out.append((f"P{n}^2-k3", path_power(n, 2), ident, 3, 3))
        out.append((f"RB{n}-b2", random_bandwidth(n, 2, 0.5, seed=n), ident, 3, 2))
        if n >= 600:
            m = n - n % 3
            out.append((f"C{m}^2-k2", cycle_power(m, 2), zigzag(m), 3, 2))
            out.append((f"RB{n}-b3", random_bandwidth(n, 3, 0.5, seed=n + 1), ident, 4, 2))
    return out


def cycle_suite():
    """(name, H, labelling, r, m, xi, route) instances for the cycle-power homomorphism."""
    out = [
        ("P2400^1-m6-lemma", path_power(2400, 1), Labelling.identity(2400), 2, 6, 0.1, "lemma"),
        ("P1800^1-m4-lemma", path_power(1800, 1), Labelling.identity(1800), 2, 4, 0.1, "lemma"),
        ("P1200^1-m6-lemma", path_power(1200, 1), Labelling.identity(1200), 2, 6, 0.1, "lemma"),
        ("P2400^2-m9-lemma", path_power(2400, 2), Labelling.identity(2400), 3, 9, 0.1, "lemma"),
        ("P2400^2-m12-lemma", path_power(2400, 2), Labelling.identity(2400), 3, 12, 0.15, "lemma"),
        ("P2400^2-m12", path_power(2400, 2), Labelling.identity(2400), 3, 12, 0.1, "auto"),
        ("C600-m6", cycle_power(600, 1), zigzag(600), 2, 6, 0.1, "auto"),
        ("E300-m6", empty(300), Labelling.identity(300), 2, 6, 0.1, "auto"),
        ("RB600-m6", random_bandwidth(600, 2, 0.5, seed=3), Labelling.identity(600), 2, 6, 0.1, "auto"),
    ]
    return out
