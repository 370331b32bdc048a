"""Discrete coefficients e1_disc, e2_disc on a refinement sequence versus the continuum values."""
import argparse
import csv
import sys

from pflab import coeffs, fock

GRIDS = [(2, 2, 4), (3, 3, 4), (4, 4, 6), (6, 6, 8), (8, 8, 10), (12, 10, 12)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--max-grids", type=int, default=5)
    args = ap.parse_args()
    e1 = coeffs.e1_closed(args.lam)
    e2 = coeffs.e2_total(args.lam, tol=1e-9, n_samples=None).e2
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n_r", "n_t", "n_phi", "modes", "e1_disc", "e1_err", "e2_disc", "e2_err", "vacuum_constant"])
    for g in GRIDS[: args.max_grids]:
        grid = fock.build_grid(args.lam, *g)
        dc = fock.discrete_coeffs(grid)
        w.writerow([*g, grid.size, dc.e1, dc.e1 - e1, dc.e2, dc.e2 - e2, grid.vacuum_constant])


if __name__ == "__main__":
    main()
