"""Grid-refinement study of the first-order-condition residuals.

Solves the chosen preset at a sequence of grid sizes and prints how the
median/max relative Euler residual over the interior window decays.
"""

import argparse
import time

from rsgrowth import (Grid, default_x_max, envelope_check, euler_report,
                      make_preset, solve)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="multiplicative")
    ap.add_argument("--sizes", type=int, nargs="+",
                    default=[200, 400, 800, 1600])
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()

    model = make_preset(args.preset)
    x_max = default_x_max(model)
    print(f"preset={args.preset}  alpha*beta={model.modulus:.6f}  "
          f"x_max={x_max:.4f}  tol={args.tol:g}")
    print(f"{'M':>6} {'median':>12} {'max':>12} {'envelope':>12} "
          f"{'iters':>6} {'sec':>7}")
    prev = None
    for m in args.sizes:
        t0 = time.time()
        r = solve(model, Grid.uniform(m, x_max), tol=args.tol)
        rep = euler_report(r, model)
        env = envelope_check(r, model)
        note = ""
        if prev is not None:
            note = f"  (x{prev / rep.median_residual:.2f})"
        print(f"{m:>6} {rep.median_residual:>12.3e} {rep.max_residual:>12.3e} "
              f"{env.max_rel_error:>12.3e} {r.iterations:>6} "
              f"{time.time() - t0:>7.1f}{note}")
        prev = rep.median_residual


if __name__ == "__main__":
    main()
