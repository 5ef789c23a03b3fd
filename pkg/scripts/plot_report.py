"""Render a calibration report: per-pose deviation of each variant and the optimizer trace.

    dhcalib calibrate --in data.json --out params.json --report report.json
    python3 scripts/plot_report.py report.json --out report.png
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from dhcalib import files  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("report")
    parser.add_argument("--out", default="report.png")
    args = parser.parse_args()
    rep = files.load_report(args.report)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(13, 4.5))
    for name, series in rep["variants"].items():
        # exact fits are zero; floor them so they stay on a log axis
        ax1.plot(np.maximum(series["per_pose"], 1e-6), marker=".", label=f"{name} (mean {series['mean']:.3g} px)")
    joints = np.array(rep["variants"]["classic"]["joint"])
    for boundary in np.flatnonzero(np.diff(joints)) + 0.5:
        ax1.axvline(boundary, color="0.85", lw=0.8)
    ax1.set_yscale("log")
    ax1.set_xlabel("pose (grouped by swept joint)")
    ax1.set_ylabel("mean pixel deviation [px]")
    ax1.legend()

    trace = np.array(rep["optimization"]["trace"])
    ax2.semilogy(trace[:, 0], label="objective [px]")
    ax2.semilogy(trace[:, 1], label="|gradient|")
    ax2.set_xlabel("iteration")
    ax2.legend()
    ax2.set_title(rep["optimization"]["status"])

    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
