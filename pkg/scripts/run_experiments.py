"""Run the Monte-Carlo tables at full scale and write one CSV per table.

    python scripts/run_experiments.py --out results/ [--quick]

``--quick`` shrinks every table to a smoke-test size.
"""

import argparse
import json
import os
import time

from rpm_lab import experiments as ex


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--quick", action="store_true")
    args = p.parse_args()
    os.makedirs(args.out, exist_ok=True)

    if args.quick:
        base = ex.TrialConfig(n=1000, trials=500, seed=args.seed, workers=args.workers)
        rd = ex.TrialConfig(trials=200, seed=args.seed, workers=args.workers, n_list=(50, 500, 5000))
        local = dict(r=1, n_list=(100, 1000), m=4000, trials=100, m0=500, max_doublings=2)
    else:
        base = ex.TrialConfig(seed=args.seed, workers=args.workers)
        rd = ex.TrialConfig(trials=2000, seed=args.seed, workers=args.workers)
        local = dict(r=1, n_list=(100, 1000, 10_000), m=10_000, trials=1000)

    summary = {}

    def save(table, started):
        table.write(os.path.join(args.out, f"{table.name}.csv"))
        summary[table.name] = {"passed": table.passed, "seconds": round(time.time() - started, 1),
                               "notes": table.notes}
        print(f"{table.name:18s} {'pass' if table.passed else 'FAIL'}  {time.time() - started:7.1f}s")

    t0 = time.time()
    save(ex.verify_eq12(max_len=3 if args.quick else 4, seed=args.seed), t0)
    t0 = time.time()
    stats = ex.collect(base.n, base.trials, base.seed, base.workers)
    save(ex.verify_degree_tail(base, stats), t0)
    t0 = time.time()
    save(ex.verify_boundary_tail(base, stats), t0)
    t0 = time.time()
    save(ex.verify_root_distance(rd), t0)
    t0 = time.time()
    save(ex.verify_root_choice(base.n, min(base.trials, 2000), args.seed, args.workers), t0)
    t0 = time.time()
    save(ex.verify_local_convergence(seed=args.seed, workers=args.workers, **local), t0)

    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump({"config": ex.config_dict(base), "tables": summary}, fh, indent=1, default=str)


if __name__ == "__main__":
    main()
