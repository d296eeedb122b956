"""Anatomy of the scalar update behind every coordinate step.

Each coordinate step solves
    min_t  v t^2 / 2 - z t + alpha p(|t|) + lam (1 - alpha) t^2 / 2
in closed form.  Lasso shrinks by a constant, SCAD and MCP start like lasso
and then let big coefficients escape untouched.  This prints the maps side
by side and locates the breakpoints.

Run:  python3 demos/threshold_play.py
"""

import numpy as np

from robustpath import penalty_spec, penalty_value, threshold_update

V, LAM = 1.0, 1.0


def row(z, pens):
    return [threshold_update(p, z, V, LAM) for p in pens]


def main():
    pens = [
        penalty_spec("lasso"),
        penalty_spec("scad", a=3.7),
        penalty_spec("mcp", a=3.0),
    ]
    print("v = %g, lam = %g, alpha = 1" % (V, LAM))
    print("%8s  %10s  %10s  %10s" % ("z", "lasso", "scad", "mcp"))
    for z in (0.5, 1.0, 1.5, 2.0, 2.7, 3.0, 3.7, 4.0, 6.0):
        out = row(z, pens)
        print("%8.2f  %10.4f  %10.4f  %10.4f" % (z, *out))
    print()
    print("breakpoints at this setting:")
    print("  lasso: dead zone ends at z = lam")
    print("  scad:  plain soft shrink to z = 2 lam, tapered to z = 3.7 lam, identity after")
    print("  mcp:   tapered shrink to z = 3 lam, identity after")
    print()

    # Identity tail check: far from zero both folded penalties are flat, so
    # the update must return z / v exactly.
    scad, mcp = pens[1], pens[2]
    for z in (5.0, 9.0):
        assert threshold_update(scad, z, V, LAM) == z / V
        assert threshold_update(mcp, z, V, LAM) == z / V
    print("identity tail holds for scad and mcp")

    theta = np.linspace(0.0, 5.0, 6)
    print("penalty values on a grid (lam = 1):")
    for p in pens:
        print("  %-5s %s" % (p.family, np.round(penalty_value(p, LAM, theta), 4)))


if __name__ == "__main__":
    main()
