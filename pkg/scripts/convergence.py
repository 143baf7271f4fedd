"""Convergence table for the lattice discretisation on T^3.

Columns: gradient-consistency relative error, Bianchi residual and the
Weitzenboeck mismatch |E_{1/8} - Dirac energy| / Dirac energy, for N = 8..32.
"""
import argparse

from spinorflow import checks, scenarios
from spinorflow import gradient as G
from spinorflow.clifford import clifford_rep
from spinorflow.functionals import SpinorPair
from spinorflow.lattice import TorusLattice


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitude", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--order", type=int, default=2, choices=(2, 4))
    args = ap.parse_args()
    rep = clifford_rep(3)
    d = checks.random_direction(scenarios.make_rng(args.seed + 1), TorusLattice(3, 8), rep)
    prev = None
    print(f"{'N':>3} {'gradient':>10} {'bianchi':>10} {'weitzenb':>10}   orders")
    for N in (8, 16, 32):
        lat = TorusLattice(3, N, order=args.order)
        sc = scenarios.perturbed_flat(lat, rep, args.amplitude, seed=args.seed)
        pair = SpinorPair(lat, rep, sc.g, sc.phi)
        row = (checks.gradient_check(pair, d.sample(lat, pair.phi)).relative,
               G.bianchi_residual(pair), checks.weitzenbock_error(pair))
        orders = "" if prev is None else "  ".join(f"{checks.measured_order(a, b):.2f}" for a, b in zip(prev, row))
        print(f"{N:>3} " + " ".join(f"{v:10.2e}" for v in row) + "   " + orders)
        prev = row


if __name__ == "__main__":
    main()
