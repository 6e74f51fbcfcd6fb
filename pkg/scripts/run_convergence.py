"""Mean A-hat against sample size for circle, Gaussian R^2=0.5 and independent data.

    python scripts/run_convergence.py [--n 50,100,200,400] [--replicates 10]
"""
import argparse

from kdassoc import benchgen

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", default="50,100,200,400")
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n_grid = [int(v) for v in args.n.split(",")]
    rows = benchgen.convergence_sweep(benchgen.CONVERGENCE_FAMILIES, n_grid, args.replicates,
                                      args.seed)
    print(benchgen.format_rows(rows, benchgen.CONVERGENCE_COLUMNS), end="")
