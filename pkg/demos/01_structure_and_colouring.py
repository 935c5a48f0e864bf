"""Arrangeability, bandwidth and balanced colourings on small guests.

Run with ``python3 demos/01_structure_and_colouring.py``.
"""

import numpy as np

from arrangeable.colouring import balance_colouring, build_blocks, colour_report
from arrangeable.graph import Labelling, path_power, random_bandwidth
from arrangeable.structure import (
    arrangeability_of_order,
    heuristic_bandwidth_labelling,
    min_arrangeability_exact,
)


def main():
    print("Square of a path on 10 vertices")
    H = path_power(10, 2)
    ident = Labelling.identity(10)
    print("  arrangeability of the natural order:", arrangeability_of_order(H, ident).a)
    print("  exact minimum over all orders:      ", min_arrangeability_exact(H).a)

    print("\nA shuffled bandwidth-3 graph; the heuristic recovers a narrow labelling")
    G = random_bandwidth(400, 3, 0.5, seed=1)
    perm = np.random.default_rng(0).permutation(G.n)
    shuffled = G.relabel(perm)
    cert = heuristic_bandwidth_labelling(shuffled, seed=0)
    print(f"  heuristic bandwidth {cert.b} on n = {G.n}")

    print("\nBalancing a lopsided path colouring (n = 2400, r = 2, ell = 10)")
    n, ell, beta = 2400, 10, 1 / 2400
    P = path_power(n, 1)
    L = Labelling.identity(n)
    length = build_blocks(n, 2, beta).length
    sigma = np.tile([1, 2], n // 2)
    # every 20th block trades colour 2 for colour 0, which skews the counts
    for t in range(0, n // length, 2 * ell):
        seg = slice(t * length, (t + 1) * length)
        sigma[seg] = np.where(np.arange(length) % 2 == 0, 1, 0)
    before = colour_report(P, L, sigma, 2, beta, ell)
    out, rep = balance_colouring(P, L, sigma, 2, ell, beta, return_report=True)
    after = colour_report(P, L, out, 2, beta, ell)
    print("  class sizes before:", before["class_sizes"])
    print("  class sizes after: ", after["class_sizes"])
    print("  switching blocks used:", len(rep.switching_blocks))
    print("  spread of colour counts at each switch:", rep.spread_trace[:8], "...")


if __name__ == "__main__":
    main()
