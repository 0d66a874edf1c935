"""Comparative statics in the risk-sensitivity coefficient.

Solves the preset across a gamma grid and reports how the value function
and the investment policy shift with risk aversion (values fall, the
precautionary motive moves the policy).
"""

import argparse

import numpy as np

from rsgrowth import Grid, default_x_max, make_preset, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="multiplicative")
    ap.add_argument("--gammas", type=float, nargs="+",
                    default=[1e-6, 0.5, 1.0, 2.0, 5.0])
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--x", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    args = ap.parse_args()

    base = make_preset(args.preset)
    grid = Grid.uniform(args.points, default_x_max(base))
    header = f"{'gamma':>8} " + " ".join(
        f"{'V(' + f'{x:g}' + ')':>10} {'i*(' + f'{x:g}' + ')':>10}"
        for x in args.x)
    print(header)
    prev_v = None
    for g in args.gammas:
        r = solve(base.with_gamma(g), grid, tol=1e-8)
        cells = []
        for x in args.x:
            cells.append(f"{float(r.value(x)):>10.5f}")
            cells.append(f"{float(r.policy.invest_at(x)):>10.5f}")
        print(f"{g:>8g} " + " ".join(cells))
        v = r.value.values
        if prev_v is not None:
            assert np.all(v <= prev_v + 1e-9), "value ordering in gamma broke"
        prev_v = v


if __name__ == "__main__":
    main()
