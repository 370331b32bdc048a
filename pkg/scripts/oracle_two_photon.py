"""Independent integrator check: scipy nquad on the reduced two-photon kernels at lam = 1."""
import numpy as np
from scipy.integrate import nquad

from pflab import coeffs, kernels

vals = {}
for name in coeffs.TWO_PHOTON:
    v, err = nquad(lambda t, r2, r1: float(kernels.reduced_kernel(name, r1, r2, t, 1.0)),
                   [[-1, 1], [0, 1], [0, 1]], opts={"epsabs": 1e-13, "epsrel": 1e-12})
    vals[name] = v
    print(f"{name:5s} {v:.12f}  (+- {err:.1e})")
vals["iee"] = (2 * np.log(2) - 1) / np.pi
vals["n1"] = 2 / np.pi * (np.log(2) - 0.5)
print(f"e2    {coeffs.combine_e2(vals):.12f}")
