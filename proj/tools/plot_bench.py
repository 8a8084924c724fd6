#!/usr/bin/env python3
"""Plot a bench report written by `devaware bench`.

Draws mean time per invocation against invocation count, one line per
strategy, with the standard deviation as error bars. Falls back to a text
table when matplotlib is missing.
"""

import argparse
import json
import statistics
import sys
from collections import defaultdict


def summarize(report):
    per_call = defaultdict(list)
    for row in report["results"]:
        per_call[(row["strategy"], row["count"])].append(row["total_ns"] / row["count"])
    out = defaultdict(list)
    for (strategy, count), values in sorted(per_call.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        sd = statistics.stdev(values) if len(values) > 1 else 0.0
        out[strategy].append((count, statistics.mean(values), sd))
    return out


def print_table(series, stream=sys.stdout):
    print(f"{'strategy':<16}{'count':>8}{'mean ns/call':>16}{'stddev':>12}", file=stream)
    for strategy, points in series.items():
        for count, mean, sd in points:
            print(f"{strategy:<16}{count:>8}{mean:>16.0f}{sd:>12.0f}", file=stream)


def plot(series, out_path, partial):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for strategy, points in series.items():
        counts = [p[0] for p in points]
        ax.errorbar(counts, [p[1] for p in points], yerr=[p[2] for p in points], marker="o", capsize=3,
                    label=strategy)
    ax.set_xscale("log")
    ax.set_xlabel("invocations per run")
    ax.set_ylabel("mean ns per invocation")
    ax.set_title("Device-awareness strategies" + (" (partial run)" if partial else ""))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("report", help="bench report (.json)")
    parser.add_argument("--out", help="image path (default: report path with .png)")
    parser.add_argument("--text", action="store_true", help="print the table only")
    args = parser.parse_args(argv)

    try:
        with open(args.report, encoding="utf-8") as fh:
            report = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    series = summarize(report)
    if not series:
        print("error: report holds no results", file=sys.stderr)
        return 1
    print_table(series)
    if args.text:
        return 0

    out_path = args.out or (args.report.rsplit(".", 1)[0] + ".png")
    try:
        plot(series, out_path, report.get("partial", False))
    except ImportError:
        print("matplotlib not available; printed the table only", file=sys.stderr)
        return 0
    print(f"wrote {out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
