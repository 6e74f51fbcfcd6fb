"""Regenerate the shipped small-sample correction table.

    python scripts/calibrate_correction.py [--workers 4] [--out PATH]
"""
import argparse
import logging
import time
from pathlib import Path

from kdassoc.correction import (DEFAULT_DIM_GRID, DEFAULT_N_GRID, DEFAULT_R2_GRID, DEFAULT_REPLICATES,
                                DEFAULT_SEED, calibrate_correction)

SHIPPED = Path(__file__).resolve().parents[1] / "src" / "kdassoc" / "data" / "correction_table.tsv"

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=SHIPPED)
    ap.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--dims", default=",".join(map(str, DEFAULT_DIM_GRID)),
                    help="comma-separated joint kernel dimensions")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    t0 = time.time()
    table = calibrate_correction(DEFAULT_N_GRID, DEFAULT_R2_GRID, args.replicates, args.seed,
                                 workers=args.workers,
                                 dim_grid=[int(d) for d in args.dims.split(",")])
    table.save(args.out)
    print(table.dumps())
    print(f"wrote {args.out} in {time.time() - t0:.0f}s")
