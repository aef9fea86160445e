"""Exact normal-traction solve for the thickness stretches versus the closed forms, as h shrinks.

    python scripts/neumann_sweep.py
"""

import numpy as np

from cosserat_shell import geometry as geo
from cosserat_shell import kinematics as kin
from cosserat_shell import suites
from cosserat_shell.material import MaterialParams


def main():
    p = MaterialParams(mu=1.0, lam=0.7, mu_c=0.3, L_c=0.5, b1=1.1, b2=0.9, b3=1 / 3)
    rng = np.random.Generator(np.random.Philox(11))
    s = geo.builtin_surface("hyperbolic_paraboloid", (1.0, 1.5))
    x1, x2 = suites.sample_points(s, 1, rng)
    f = geo.frame_at(s, x1[0], x2[0])
    st = suites.random_state(f, rng)
    full = kin.strain_measures(f, st, p, "full")
    approx = kin.strain_measures(f, st, p, "approximate")
    print(f"closed form: rho_m {full.rho_m:.12f}  rho_b full {full.rho_b:.6e}  approximate {approx.rho_b:.6e}")
    for h in (1e-1, 3e-2, 1e-2, 3e-3, 1e-3):
        rm, rb = kin.rho_exact_neumann(f, st, p, h)
        print(f"h={h:<6g} rho_m gap {abs(rm - full.rho_m):.3e}  rho_b gap {abs(rb - full.rho_b):.3e}")


if __name__ == "__main__":
    main()
