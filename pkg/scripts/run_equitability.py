"""Equitability sweep over the functional families, printed as TSV with the RMSE.

    python scripts/run_equitability.py [--x-dim 2] [--replicates 10] [--n 400]
"""
import argparse
import time

from kdassoc import benchgen

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--x-dim", type=int, default=1, choices=(1, 2))
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--r2", default="0.1,0.3,0.6,0.9", help="target true R^2 levels")
    args = ap.parse_args()

    noise = [benchgen.noise_for_r2(float(r)) for r in args.r2.split(",")]
    t0 = time.time()
    rows = benchgen.equitability_sweep(benchgen.FUNCTIONAL, noise, args.n, args.replicates,
                                       args.seed, x_dim=args.x_dim)
    print(benchgen.format_rows(rows, benchgen.EQUITABILITY_COLUMNS), end="")
    print(f"# rmse={benchgen.equitability_rmse(rows):.4f} ({time.time() - t0:.0f}s)")
