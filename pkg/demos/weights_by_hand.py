"""Compute resampling weights on a toy sample and watch the bias leave.

Run:  python3 demos/weights_by_hand.py
"""

import numpy as np

from causalboot import (
    ResampleConfig,
    SimConfig,
    cb_resample,
    cb_weights,
    simulate,
)


def main():
    # A heavily confounded training sample: u agrees with y 95% of the time.
    cfg = SimConfig(scenario="a", n=20_000, q_c=0.95)
    data = simulate(cfg, "conf", seed=0)
    u = data.columns["u"]
    print("before resampling:")
    print("  P(u=1)        =", round(float(u.mean()), 3))
    print("  P(u=1 | y=1)  =", round(float(u[data.y == 1].mean()), 3))

    table = cb_weights(data.weight_columns(), "a")
    print("weight table: classes", table.classes, "normalized", table.normalized)
    for c in table.classes:
        col = table.column(c)
        print(f"  class {c}: min {col.min():.2e}  max {col.max():.2e}  sum {col.sum():.6f}")

    out = cb_resample(data, table, ResampleConfig(seed=1))
    u2 = out.shadow["u"]
    print("after resampling:")
    print("  P(u=1)        =", round(float(u2.mean()), 3))
    print("  P(u=1 | y=1)  =", round(float(u2[out.y == 1].mean()), 3))
    gap = abs(u2[out.y == 1].mean() - u2.mean())
    print("confounder-label dependence gap:", round(float(gap), 4))


if __name__ == "__main__":
    main()
