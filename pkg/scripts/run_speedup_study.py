#!/usr/bin/env python3
"""Reproduce the ridge speedup study: asynchronous swarm versus the
synchronized batch baseline on three instance sizes.

For each (dim, threads) instance the script runs paired replications to
the 0.1 squared-error threshold and prints the measured crossing-time
ratio next to the harmonic-number prediction. Outputs (per-instance
comparison.json plus a study summary) land under --out.
"""

import argparse
import json
import os
import sys

from swarmsgd.cli import cmd_compare, experiment_config_from_dict
from swarmsgd.theory import harmonic_speedup

INSTANCES = ((20, 20), (20, 100), (100, 50))


def build_config(dim, n_threads, seed, out_dir, replications):
    return experiment_config_from_dict(
        {
            "objective": {"kind": "ridge", "dim": dim, "rho": 0.1},
            "run": {
                "n_threads": n_threads,
                "step_size": 0.01,
                "attraction": 1.0,
                "mean_sample_time": 0.02,
            },
            "graph": {"kind": "erdos_renyi", "p": 10.0 / n_threads},
            "replications": replications,
            "threshold": 0.1,
            "master_seed": seed,
            "output_dir": out_dir,
        }
    )


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/speedup_study", help="output directory")
    parser.add_argument("--replications", type=int, default=50)
    parser.add_argument("--seed", type=int, default=1001, help="master seed of the first instance")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes per instance")
    args = parser.parse_args(argv)

    rows = []
    print(f"{'instance':>12} {'measured':>9} {'predicted':>10} {'error':>7} {'excluded':>9}")
    for offset, (dim, n_threads) in enumerate(INSTANCES):
        out_dir = os.path.join(args.out, f"d{dim}_n{n_threads}")
        config = build_config(dim, n_threads, args.seed + offset, out_dir, args.replications)
        report = cmd_compare(config, jobs=args.jobs)
        predicted = harmonic_speedup(n_threads).delta_t_c_over_delta_t
        if report.ratio is None:
            print(f"({dim},{n_threads}): no replication crossed the threshold", file=sys.stderr)
            return 1
        rel = report.ratio / predicted - 1.0
        rows.append(
            {
                "dim": dim,
                "n_threads": n_threads,
                "measured_ratio": report.ratio,
                "predicted_ratio": predicted,
                "excluded": len(report.excluded),
            }
        )
        print(
            f"({dim:>4},{n_threads:>4}) {report.ratio:9.3f} {predicted:10.3f} "
            f"{rel:+7.1%} {len(report.excluded):9d}"
        )

    os.makedirs(args.out, exist_ok=True)
    summary_path = os.path.join(args.out, "study.json")
    with open(summary_path, "w") as handle:
        json.dump({"replications": args.replications, "instances": rows}, handle, indent=2)
        handle.write("\n")
    print(f"wrote {summary_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
