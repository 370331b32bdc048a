"""Epsilon scan of the binding margin for the smooth bump at its resonance coupling."""
import argparse

from pflab import binding


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--alphas", type=float, nargs="+", default=[1e-3, 3e-3, 1e-2])
    ap.add_argument("--j-max", type=int, default=14)
    args = ap.parse_args()
    pot = binding.smooth_bump()
    res = binding.find_resonance_coupling(pot, binding.scan_bracket(pot))
    print(f"g* = {res.g_star:.12f}  integral-equation residual {res.integral_equation_residual:.1e}")
    print("alpha  epsilon  margin  delta  nu  C1  C2")
    for a in args.alphas:
        for rep in binding.epsilon_scan(res, args.lam, a, args.j_max):
            s = rep.state
            print(f"{a:.0e}  {rep.epsilon:.3e}  {rep.margin:+.4e}  {rep.delta:+.3e}  {rep.nu:+.3e}  "
                  f"{s.c1:.4f}  {s.c2:.4f}")


if __name__ == "__main__":
    main()
