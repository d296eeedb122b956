"""Walk the loss families and check the quadratic ceiling with bare numpy.

Every family ships a curvature constant B.  The fitting loop leans on one
inequality: the parabola touching the loss at any anchor z with curvature B
stays above the loss everywhere.  This script samples anchors and probe
points and reports the worst violation, which should be roundoff and
nothing more.

Run:  python3 demos/loss_tour.py
"""

import numpy as np

from robustpath import loss_grad, loss_spec, loss_value
from robustpath.losses import _bound

SPECS = [
    loss_spec("ls"),
    loss_spec("huber"),
    loss_spec("logistic"),
    loss_spec("clossr", sigma=1.0),
    loss_spec("closs", sigma=0.9),
    loss_spec("gloss", sigma=1.1),
    loss_spec("qloss", sigma=0.5),
]


def worst_gap(spec, n=4000, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-15.0, 15.0, n)
    u = rng.uniform(-15.0, 15.0, n)
    B = _bound(spec)
    ceiling = loss_value(spec, z) + loss_grad(spec, z) * (u - z) + 0.5 * B * (u - z) ** 2
    return float(np.min(ceiling - loss_value(spec, u)))


def main():
    print("family     sigma   bounded  B            worst surrogate gap")
    for spec in SPECS:
        gap = worst_gap(spec)
        print("%-9s  %-5s   %-7s  %-11.6g  %+.3e"
              % (spec.family, "%g" % spec.sigma if spec.sigma else "-",
                 not spec.convex, _bound(spec), gap))
    print()

    # The bounded families saturate: a huge residual costs no more than the
    # plateau, which is the whole point for outlier resistance.
    grid = np.array([0.0, 1.0, 3.0, 10.0, 1000.0])
    print("clossr value along |residual|:", np.round(loss_value(SPECS[3], grid), 4))
    print("ls     value along |residual|:", loss_value(SPECS[0], grid))


if __name__ == "__main__":
    main()
