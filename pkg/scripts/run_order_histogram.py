#!/usr/bin/env python3
"""Histogram of selected polynomial orders at a single sample size.

Repeatedly draws order-4 data, runs each selection rule, and tallies which
order every rule picked.  Quick by default; --full uses 1000 replications.
"""

import argparse
import sys

from mcselect.experiments import config_from_dict, draw_seed, run_experiment, write_report


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results/order_histogram")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-points", type=int, default=100)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--rules", default="aic,bic,ub")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--full", action="store_true", help="full replication count")
    a = p.parse_args(argv)

    seed = draw_seed() if a.seed is None else a.seed
    if a.seed is None:
        print(f"seed: {seed} (pass --seed {seed} to reproduce)")
    reps = a.replications if a.replications is not None else (1000 if a.full else 200)
    config = config_from_dict({
        "experiment": "fixed",
        "sigma2": 1.0,
        "max_order": 6,
        "rules": [r.strip() for r in a.rules.split(",") if r.strip()],
        "samples": a.samples,
        "n_values": [a.n_points],
        "replications": reps,
        "true_order": 4,
        "true_coefficients": [0.1, 0.1, -0.3, 0.4],
        "seed": seed,
    })
    report = run_experiment(config, jobs=a.jobs)

    orders = range(1, config.max_order + 1)
    print(f"\nselected-order frequencies, N={a.n_points}, {reps} replications")
    print("rule      " + "".join(f"{k:>8}" for k in orders))
    for rule in config.rules:
        row = [report.frequency(rule, a.n_points, 4, k) for k in orders]
        print(f"{rule:<10}" + "".join(f"{f:8.3f}" for f in row))

    paths = write_report(report, a.out)
    print(f"\nwrote {paths['histogram']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
