"""Command-line front end.

Subcommands::

    kdassoc assoc       --input data.csv --groups "x1,x2|y" [--no-correction]
    kdassoc test        --input data.csv --groups "x|y" [--b 200] [--seed 0]
    kdassoc semipartial --input data.csv --groups "y|x|c"
    kdassoc bench equitability [--families a,b] [--noise 0,0.5] [--n 400]
                               [--replicates 10] [--seed 0] [--x-dim 1]
    kdassoc bench convergence  [--families circle] [--n 50,100,200]
                               [--replicates 10] [--seed 0]
    kdassoc calibrate   [--n 20,50] [--dims 2,3] [--replicates 200] [--seed S]
                        [--output table.tsv]

Results go to stdout (or ``--output``): JSON for assoc/test/semipartial, tab
separated text for bench and calibrate.  Failures print a JSON object
``{"error": {"type": ..., "message": ...}}`` on stderr and exit with 2 for
usage errors, 1 for data errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import benchgen
from .composite import SemipartialRequest, semipartial_fits
from .correction import (DEFAULT_DIM_GRID, DEFAULT_N_GRID, DEFAULT_R2_GRID, DEFAULT_REPLICATES, DEFAULT_SEED,
                         calibrate_correction)
from .estimator import EstimatorConfig, estimate_association
from .inference import permutation_test
from .table import AssociationError, DataTable, GroupingError, VariableGrouping

log = logging.getLogger("kdassoc")


class IngestError(AssociationError):
    pass


class UsageError(Exception):
    pass


def ingest_csv(path) -> DataTable:
    """Read a headed, comma-delimited numeric CSV, dropping incomplete rows."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise IngestError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    seen = set()
    for h in header:
        if h in seen:
            raise IngestError(f"duplicate column name {h!r}")
        seen.add(h)

    kept, dropped = [], 0
    for row in rows[1:]:
        if not row or all(not f.strip() for f in row):
            continue
        try:
            if len(row) != len(header):
                raise ValueError
            vals = [float(f) for f in row]
            if not all(math.isfinite(v) for v in vals):
                raise ValueError
        except ValueError:
            dropped += 1
            continue
        kept.append(vals)
    if dropped:
        log.warning("dropped %d row%s with missing or non-numeric fields",
                    dropped, "" if dropped == 1 else "s")
    if not kept:
        raise IngestError(f"{path} has no complete numeric rows")
    if len(kept) < 3:
        raise IngestError(f"{path} has only {len(kept)} complete rows")
    return DataTable(tuple(header), np.array(kept))


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _cfg(args) -> EstimatorConfig:
    return EstimatorConfig(apply_correction=not getattr(args, "no_correction", False),
                           seed=getattr(args, "seed", 0) or 0)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_assoc(args) -> str:
    table = ingest_csv(args.input)
    grouping = VariableGrouping.parse(args.groups, table.names)
    return _dump_json(estimate_association(table, grouping, _cfg(args)).to_dict())


def cmd_test(args) -> str:
    table = ingest_csv(args.input)
    grouping = VariableGrouping.parse(args.groups, table.names)
    result = permutation_test(table, grouping, b=args.b, seed=args.seed, cfg=_cfg(args),
                              keep_stats=args.keep_stats, workers=args.workers)
    return _dump_json(result.to_dict())


def cmd_semipartial(args) -> str:
    table = ingest_csv(args.input)
    parts = args.groups.split("|")
    if len(parts) != 3:
        raise GroupingError('semipartial needs --groups "Y|X|C" (three groups)')
    cols = [_columns(p, table.names) for p in parts]
    req = SemipartialRequest(cols[0], cols[1], cols[2], _cfg(args))
    return _dump_json(semipartial_fits(table, req).to_dict())


def _columns(part: str, names) -> tuple[int, ...]:
    lookup = {n: i for i, n in enumerate(names)}
    cols = [c.strip() for c in part.split(",") if c.strip()]
    if not cols:
        raise GroupingError("empty group")
    missing = [c for c in cols if c not in lookup]
    if missing:
        raise GroupingError(f"unknown column(s): {', '.join(missing)}")
    return tuple(lookup[c] for c in cols)


def cmd_bench_equitability(args) -> str:
    families = args.families.split(",") if args.families else list(benchgen.FUNCTIONAL)
    noise = _floats(args.noise) if args.noise is not None else [
        benchgen.noise_for_r2(r) for r in (0.1, 0.3, 0.6, 0.9)]
    n = _ints(args.n)[0] if args.n else 400
    rows = benchgen.equitability_sweep(families, noise, n, args.replicates, args.seed,
                                       x_dim=args.x_dim, cfg=_cfg(args))
    return f"# seed={args.seed}\n" + benchgen.format_rows(rows, benchgen.EQUITABILITY_COLUMNS)


def cmd_bench_convergence(args) -> str:
    families = args.families.split(",") if args.families else list(
        benchgen.CONVERGENCE_FAMILIES)
    n_grid = _ints(args.n) if args.n else [50, 100, 200, 400]
    rows = benchgen.convergence_sweep(families, n_grid, args.replicates, args.seed,
                                      cfg=_cfg(args))
    return f"# seed={args.seed}\n" + benchgen.format_rows(rows, benchgen.CONVERGENCE_COLUMNS)


def cmd_calibrate(args) -> str:
    n_grid = _ints(args.n) if args.n else list(DEFAULT_N_GRID)
    dim_grid = _ints(args.dims) if args.dims else list(DEFAULT_DIM_GRID)
    table = calibrate_correction(n_grid, DEFAULT_R2_GRID, args.replicates, args.seed,
                                 workers=args.workers, dim_grid=dim_grid)
    return table.dumps()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kdassoc", description="Kernel-density association (A-hat) toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, data=True):
        if data:
            sp.add_argument("--input", required=True)
            sp.add_argument("--groups", required=True)
        sp.add_argument("--no-correction", action="store_true")
        sp.add_argument("--output")

    sp = sub.add_parser("assoc", help="estimate A-hat between column groups")
    common(sp)
    sp.set_defaults(func=cmd_assoc)

    sp = sub.add_parser("test", help="permutation test of independence")
    common(sp)
    sp.add_argument("--b", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--keep-stats", action="store_true")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("semipartial", help='semipartial association, --groups "Y|X|C"')
    common(sp)
    sp.set_defaults(func=cmd_semipartial)

    bench = sub.add_parser("bench", help="synthetic benchmark sweeps")
    bsub = bench.add_subparsers(dest="bench", required=True, parser_class=_Parser)
    for name, func in (("equitability", cmd_bench_equitability),
                       ("convergence", cmd_bench_convergence)):
        sp = bsub.add_parser(name)
        common(sp, data=False)
        sp.add_argument("--families")
        sp.add_argument("--n")
        sp.add_argument("--replicates", type=int, default=10)
        sp.add_argument("--seed", type=int, default=0)
        if name == "equitability":
            sp.add_argument("--noise")
            sp.add_argument("--x-dim", type=int, default=1, choices=(1, 2))
        sp.set_defaults(func=func)

    sp = sub.add_parser("calibrate", help="regenerate the small-sample correction table")
    sp.add_argument("--n", help="comma-separated sample sizes")
    sp.add_argument("--dims", help="comma-separated joint kernel dimensions")
    sp.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_calibrate)
    return p


def _fail(kind: str, message: str, status: int) -> int:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}) + "\n")
    return status


def run(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="kdassoc: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        out = args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except (AssociationError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
