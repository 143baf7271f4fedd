"""Print the numerically bisected ellipticity window next to the closed form for n = 3..8."""
import argparse

import numpy as np

from spinorflow import symbol as S
from spinorflow.clifford import clifford_rep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.Generator(np.random.Philox(args.seed))
    print(f"{'n':>2} {'s_min':>14} {'closed':>14} {'s_max':>14} {'closed':>14}")
    for n in range(3, 9):
        rep = clifford_rep(n)
        lo, hi = zip(*(S.ellipticity_window(S.random_point(rep, rng)) for _ in range(args.points)))
        c = S.window_closed_form(n)
        print(f"{n:>2} {min(lo):14.10f} {c[0]:14.10f} {max(hi):14.10f} {c[1]:14.10f}")


if __name__ == "__main__":
    main()
