#!/usr/bin/env python3
"""Walk through the two-feature toy instance end to end.

Prints the classic decompositions of the least-squares fit (install final
coefficients one by one, worst ordering, greedy, and the optimal three-step
explanation), then sweeps the cost/interpretability front and reports which
path lengths the tradeoff selects. Optionally writes the front artifacts.
"""

import argparse

import numpy as np

from pathlens import (
    LinearModel,
    OptimizerConfig,
    WeightSchedule,
    best_explanation,
    cost,
    cost_sequence,
    default_lambda_grid,
    direct_path,
    exact_path,
    greedy_path,
    ols,
    stats_from_moments,
    sweep,
    weighted_loss,
)
from pathlens.cli import canonical_json, render_path_table
from pathlens.pareto import front_to_csv, front_to_json


def describe(stats, label, path, schedule):
    print(f"\n--- {label} ---")
    print(render_path_table(stats, path, 4))
    if path.K:
        print(f"loss [{schedule.describe()}]: {weighted_loss(stats, path, schedule):.4f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--K-max", type=int, default=3)
    ap.add_argument("--out", help="basename for front artifacts (.csv/.json)")
    args = ap.parse_args()

    stats = stats_from_moments(
        [[1.0, 0.9], [0.9, 1.0]], [1.274, 0.968], 2.04, ("height", "weight")
    )
    zero = LinearModel.zeros(stats.feature_names)
    fit = ols(stats)
    schedule = WeightSchedule.geometric(args.gamma)

    print(f"least-squares fit: {np.round(fit.coefficients, 4)}  cost {cost(stats, fit):.4f}")
    print(f"zero-model cost: {stats.target_second_moment:.4f}")

    describe(stats, "install final coefficients, best order", direct_path(stats, zero, 2), schedule)

    from pathlens import CoordinatePath

    worst = CoordinatePath(zero, ((1, float(fit.coefficients[1])), (0, float(fit.coefficients[0]))))
    describe(stats, "install final coefficients, worst order", worst, schedule)

    describe(stats, "greedy, two steps", greedy_path(stats, zero, 2), schedule)

    free = exact_path(stats, zero, OptimizerConfig(K=2, schedule=schedule))
    describe(stats, "optimal two steps, free endpoint", free, schedule)

    expl = best_explanation(stats, zero, fit, schedule, args.K_max)
    describe(stats, f"best explanation of the fit (K <= {args.K_max})", expl, schedule)

    report = sweep(stats, zero, schedule, default_lambda_grid(), args.K_max)
    ks = sorted({p.K for p in report.points})
    print(f"\nfront: {len(report.points)} points, selected path lengths {ks}")
    for p in report.points[:: max(1, len(report.points) // 8)]:
        print(f"  lambda={p.lam:9.4g}  K={p.K}  cost={p.cost:.4f}  loss={p.interp_loss:.4f}")
    if args.out:
        with open(args.out + ".csv", "w", encoding="utf-8") as fh:
            fh.write(front_to_csv(report))
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(canonical_json(front_to_json(report)))
        print(f"wrote {args.out}.csv and {args.out}.json")


if __name__ == "__main__":
    main()
