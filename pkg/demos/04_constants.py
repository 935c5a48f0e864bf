"""Evaluate the constant chain and see why the asymptotic regime is out of reach.

Run with ``python3 demos/04_constants.py``.
"""

import warnings

from arrangeable.pipeline import ConstantChainWarning, derive_constant_chain


def main():
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always", ConstantChainWarning)
        chain = derive_constant_chain(3, 4, 0.1, overrides={"xi": 0.1}, n=1000)

    for name in ("Delta_R_stated", "Delta_R_bound", "Delta_R", "kappa", "beta_max"):
        entry = chain.values[name]
        print(f"{name:>14s} = {entry['value']!s:<22} ({entry['formula']})")
    print()
    for name in ("eps0", "eps_prime", "eps"):
        entry = chain.values[name]
        print(f"{name:>14s} is {entry['status']}: {entry['formula']}")
    print()
    (w,) = chain.warnings
    print("warning", w["code"] + ":", w["message"])
    print("smallest n with beta * n >= 1:", chain.feasibility["min_n_for_beta_n_ge_1"])


if __name__ == "__main__":
    main()
