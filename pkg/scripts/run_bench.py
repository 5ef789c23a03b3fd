"""Classic / rough / compensated comparison over several bench seeds and noise levels.

    python3 scripts/run_bench.py --seeds 0 1 2 --noise 0 0.2 0.5 --out bench.json
"""
import argparse
import time

import numpy as np

from dhcalib import files
from dhcalib.bench import BenchConfig, make_dataset
from dhcalib.identification import calibrate, evaluate


def run(seed, sigma, scale):
    ds = make_dataset(BenchConfig(seed=seed, perturbation_scale=scale, pixel_noise_sigma=sigma))
    start = time.perf_counter()
    rough, result = calibrate(ds)
    elapsed = time.perf_counter() - start
    means = {v: evaluate(files.variant_model(v, ds, result), ds).mean for v in files.VARIANTS}
    err = np.abs(rough.dh.as_array() - ds.ground_truth.dh_true.as_array())
    mask = rough.identified
    return {
        "seed": seed,
        "sigma": sigma,
        "means": means,
        "truth_mean": evaluate(ds.ground_truth.model, ds).mean,
        "rough_error": {
            "alpha": float(err[:, 0][mask[:, 0]].max()),
            "a": float(err[:, 1][mask[:, 1]].max()),
            "d": float(err[:, 2][mask[:, 2]].max()),
        },
        "iterations": result.iterations,
        "status": result.status,
        "seconds": elapsed,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--noise", type=float, nargs="+", default=[0.0, 0.2, 0.5, 1.0])
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument("--out", help="write all rows to this JSON file")
    args = parser.parse_args()

    rows = []
    print(f"{'seed':>4} {'sigma':>5} {'classic':>9} {'rough':>9} {'compens.':>9} {'truth':>7}"
          f" {'alpha_err':>9} {'a_err':>7} {'d_err':>7} {'iters':>5}  status")
    for sigma in args.noise:
        for seed in args.seeds:
            r = run(seed, sigma, args.scale)
            rows.append(r)
            m, e = r["means"], r["rough_error"]
            print(f"{seed:4d} {sigma:5.2f} {m['classic']:9.3f} {m['rough']:9.3f} {m['compensated']:9.4f}"
                  f" {r['truth_mean']:7.4f} {e['alpha']:9.2e} {e['a']:7.3f} {e['d']:7.3f}"
                  f" {r['iterations']:5d}  {r['status']} ({r['seconds']:.1f} s)")
    if args.out:
        doc = files.header("dhcalib-bench")
        doc["rows"] = rows
        files.write_json(args.out, doc)


if __name__ == "__main__":
    main()
