"""Ground energies, trial quotients and remainder sizes versus alpha on one grid.

Prints the halving factors of the tf2 excess over alpha e1 + alpha^2 e2
and of sum (h_n, L h_n); the first is ~8 (alpha^3), and so is the second.
"""
import argparse

import numpy as np

from pflab import fock


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, nargs=3, default=[8, 6, 6])
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--alphas", type=float, nargs="+", default=[1e-3, 2e-3, 4e-3, 8e-3])
    args = ap.parse_args()
    grid = fock.build_grid(args.lam, *args.grid)
    dc = fock.discrete_coeffs(grid)
    fit = fock.fit_expansion(grid, args.alphas)
    print(f"modes {grid.size}  e1_disc {dc.e1:.12f}  e2_disc {dc.e2:.12f}  c1 {fit.c1:.12f}  c2 {fit.c2:.12f}")
    excess, rem = [], []
    print("alpha  energy  tf2-excess  tf2(literal sign)-excess  sum(h,Lh)")
    for a, res in zip(fit.alphas, fit.results):
        op = fock.assemble(grid, a)
        base = a * dc.e1 + a * a * dc.e2
        q2 = fock.rayleigh_quotient(op, fock.trial_state(op, "tf2")) - base
        ql = fock.rayleigh_quotient(op, fock.trial_state(op, "tf2", literal_sign=True)) - base
        h = fock.remainder_diagnostics(op, res).h_energy
        excess.append(q2)
        rem.append(h)
        print(f"{a:.1e}  {res.energy:.15e}  {q2:.3e}  {ql:.3e}  {h:.3e}")
    print("tf2 excess halving factors", np.round(np.array(excess[1:]) / excess[:-1], 3))
    print("remainder halving factors ", np.round(np.array(rem[1:]) / rem[:-1], 3))


if __name__ == "__main__":
    main()
