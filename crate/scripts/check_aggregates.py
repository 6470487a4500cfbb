#!/usr/bin/env python3
"""Recompute aggregates.csv from records.csv and compare.

usage: check_aggregates.py OUT_DIR [--rtol 1e-9]

Exits 0 when every shifted geometric mean and median agrees to the relative
tolerance, 1 otherwise.
"""

import argparse
import csv
import math
import statistics
import sys
from collections import defaultdict
from pathlib import Path

METRICS = ["n_f", "n_grad", "n_hess", "n_fact", "wall_seconds"]


def read_csv(path):
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    header = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return header, list(csv.DictReader(body))


def parse_header(line):
    params = {}
    for token in line.lstrip("#").split():
        if "=" in token:
            key, value = token.split("=", 1)
            params[key] = float(value)
    return params


def shifted_geomean(values, shift):
    return math.exp(sum(math.log(v + shift) for v in values) / len(values)) - shift


def close(a, b, rtol):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--rtol", type=float, default=1e-9)
    args = ap.parse_args()

    _, records = read_csv(args.out_dir / "records.csv")
    header, aggregates = read_csv(args.out_dir / "aggregates.csv")
    params = parse_header(header[0])
    shift, max_iter, max_time = params["shift"], params["max_iter"], params["max_time"]

    by_solver = defaultdict(list)
    for r in records:
        by_solver[r["solver"]].append(r)

    expected = {}
    for solver, rows in by_solver.items():
        for metric in METRICS:
            values = []
            for r in rows:
                if r["status"] == "OPTIMAL":
                    values.append(float(r[metric]))
                elif metric == "wall_seconds":
                    values.append(2 * max_time)
                else:
                    values.append(2 * max_iter)
            expected[(solver, metric)] = (
                shifted_geomean(values, shift),
                statistics.median(values),
            )

    failures = 0
    seen = set()
    for row in aggregates:
        key = (row["solver"], row["metric"])
        seen.add(key)
        if key not in expected:
            print(f"unexpected aggregate row {key}")
            failures += 1
            continue
        geo, med = expected[key]
        got_geo, got_med = float(row["shifted_geomean"]), float(row["median"])
        if not (close(geo, got_geo, args.rtol) and close(med, got_med, args.rtol)):
            print(f"mismatch {key}: expected ({geo}, {med}) got ({got_geo}, {got_med})")
            failures += 1
    for key in expected.keys() - seen:
        print(f"missing aggregate row {key}")
        failures += 1

    print(f"checked {len(aggregates)} aggregate rows, {failures} mismatches")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
