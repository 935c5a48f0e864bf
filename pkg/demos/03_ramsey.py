"""Find a monochromatic copy of a bandwidth-2 guest in a random 2-colouring.

The colouring of K_N is split into clusters, a monochromatic power of a
cycle is found in the reduced graph, the guest is mapped onto it and the
copy is embedded inside one colour class.

Run with ``python3 demos/03_ramsey.py [--N 600] [--seed 0]``.
"""

import argparse
import warnings

import numpy as np

from arrangeable.graph import Graph, random_bandwidth
from arrangeable.pipeline import run_ramsey_pipeline


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", type=int, default=600)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    H = random_bandwidth(60, 2, 0.5, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    up = np.triu(rng.random((args.N, args.N)) < 0.5, 1)
    red = up | up.T
    print(f"guest: n = {H.n}, {H.num_edges} edges; colouring of K_{args.N} with "
          f"{int(up.sum())} red edges")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = run_ramsey_pipeline(H, 2, colouring=Graph(red), seed=args.seed)

    s = rep.stages
    print("clusters:", s["partition"]["k"], " cycle length m:", s["partition"]["m"])
    print("copy of C_m^r in colour", s["cycle"]["colour"], "on clusters", s["cycle"]["copy"])
    print("vertices trimmed per cluster:", s["cycle"]["removed"])

    # independent check: every guest edge lands on an edge of one colour
    phi, e = rep.phi, H.edges
    colours = red[phi[e[:, 0]], phi[e[:, 1]]]
    print("all image edges red:", bool(colours.all()), " all blue:", bool(not colours.any()))


if __name__ == "__main__":
    main()
