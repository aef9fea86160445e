"""Six-parameter shell energies against the reduced model as the Gauss curvature varies.

Prints the identified coefficients, the drilling modulus and the relative gap
between the reduced model and the alternative six-parameter energy.

    python scripts/compare_sixparam.py [--mu-c 0.3]
"""

import argparse

import numpy as np

from cosserat_shell import energy as en
from cosserat_shell import geometry as geo
from cosserat_shell.material import MaterialParams


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mu-c", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    p = MaterialParams(mu=1.0, lam=0.7, mu_c=args.mu_c, L_c=0.5, b1=1.1, b2=0.9, b3=1 / 3, h=0.1)
    rng = np.random.Generator(np.random.Philox(args.seed))
    print(f"{'radius':>8} {'K':>9} {'mu_c_drill':>11} {'W_our':>12} {'W_EP':>12} {'W_P':>12} {'|ours-P|/ours':>14}")
    for r in (np.inf, 10.0, 3.0, 1.0, 0.5):
        s = geo.builtin_surface("plate") if np.isinf(r) else geo.builtin_surface("sphere", (r,))
        (a1, b1), (a2, b2) = s.domain
        f = geo.frame_at(s, 0.5 * (a1 + b1), 0.5 * (a2 + b2))
        c = en.identify_coefficients(p, f.K)
        E = rng.standard_normal((3, 3)) * np.array([1.0, 1.0, 0.0]) @ f.grad_theta0_inv
        Ke = rng.standard_normal((3, 3)) * np.array([1.0, 1.0, 0.0]) @ f.grad_theta0_inv
        ours = en.w_our_density(E, Ke, f, p)
        ep = en.wep_density(E, Ke, f, c)
        wp = en.wp_density(E, Ke, f, p)
        print(f"{r:8.2f} {float(f.K):9.4f} {float(c.mu_c_drill):11.6f} {float(ours):12.6e} {float(ep):12.6e} "
              f"{float(wp):12.6e} {abs(float(ours - wp)) / abs(float(ours)):14.3e}")


if __name__ == "__main__":
    main()
