"""Command-line interface: simulate, estimate, bench and the river pipeline.

Exit codes: 0 success, 2 usage or parameter-domain error, 3 degenerate
input data, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from importlib import resources

import numpy as np

from .bootstrap import BootstrapError, bias_correct
from .estimate import Algorithm, DegenerateDataError, EstimationError, run_algorithm
from .harness import ExperimentGrid, export_tables, run_grid
from .kernels import Family, KernelSpec, ParameterError
from .numeric import BracketError
from .simulate import (
    RngStream,
    SamplePath,
    SimulationError,
    read_path_csv,
    sample_path,
    write_path_csv,
)

EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_NUMERICAL = 4

_ALGORITHM_TOKENS = [a.value for a in Algorithm]
_FAMILY_TOKENS = [f.value for f in Family]


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfsim",
        description="Simulate self-similar Gaussian processes and estimate "
        "their self-similarity index.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write a simulated path as CSV")
    p_sim.add_argument("--process", required=True, choices=_FAMILY_TOKENS)
    p_sim.add_argument("--hurst", required=True, type=float)
    p_sim.add_argument("--k", type=float, default=None)
    p_sim.add_argument("--sigma2", type=float, default=1.0)
    p_sim.add_argument("--n", required=True, type=int)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--stream", type=int, default=0)
    p_sim.add_argument("--method", choices=["auto", "cholesky", "circulant"],
                       default="auto")
    p_sim.add_argument("--out", required=True)

    p_est = sub.add_parser("estimate", help="estimate the index of a path file")
    p_est.add_argument("--algorithm", required=True, choices=_ALGORITHM_TOKENS)
    p_est.add_argument("--sigma2", type=float, default=None)
    p_est.add_argument("--in", dest="in_file", required=True)

    p_bench = sub.add_parser("bench", help="run a Monte Carlo benchmark grid")
    p_bench.add_argument("--grid", required=True,
                         help="grid config file, or the name of a bundled grid")
    p_bench.add_argument("--out-dir", required=True)
    p_bench.add_argument("--workers", type=int, default=None)
    p_bench.add_argument("--seed", type=int, default=0)

    p_nile = sub.add_parser(
        "nile", help="estimate the index of an annual series windowed by year"
    )
    p_nile.add_argument("--file", required=True)
    p_nile.add_argument("--from-year", dest="from_year", required=True, type=int)
    p_nile.add_argument("--to-year", dest="to_year", required=True, type=int)
    p_nile.add_argument("--start-year", dest="start_year", type=int, default=622)
    p_nile.add_argument("--preprocess", choices=["none", "demean", "cumsum"],
                        default="demean")
    p_nile.add_argument("--bootstrap", type=int, default=0)
    p_nile.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_simulate(args) -> int:
    kwargs = {"H": args.hurst, "sigma2": args.sigma2}
    if args.k is not None:
        kwargs["K"] = args.k
    try:
        spec = KernelSpec(Family(args.process), **kwargs)
    except ParameterError as exc:
        raise CliError(f"--process/--hurst/--k/--sigma2: {exc}") from exc
    if args.n < 2:
        raise CliError(f"--n: grid size must be >= 2, got {args.n}")
    path = sample_path(spec, args.n, RngStream(args.seed, args.stream),
                       method=args.method)
    write_path_csv(path, args.out)
    return 0


def _result_row(result) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    report = result.report
    writer.writerow(
        [
            result.algorithm.value,
            f"{result.index_estimate:.17g}",
            "" if result.h_component is None else f"{result.h_component:.17g}",
            "" if result.k_component is None else f"{result.k_component:.17g}",
            "" if report is None else report.iterations,
            "" if report is None or np.isnan(report.residual)
            else f"{report.residual:.17g}",
            "; ".join(result.warnings),
        ]
    )
    return buf.getvalue()


def _cmd_estimate(args) -> int:
    algorithm = Algorithm(args.algorithm)
    if algorithm is Algorithm.KNOWN_SIGMA and args.sigma2 is None:
        raise CliError("--sigma2 is required for the known-sigma algorithm")
    try:
        path = read_path_csv(args.in_file)
    except OSError as exc:
        raise CliError(f"--in: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"--in: {exc}") from exc
    result = run_algorithm(algorithm, path, sigma2=args.sigma2)
    sys.stdout.write(_result_row(result))
    return 0


def _parse_grid_config(text: str, master_seed: int) -> list[ExperimentGrid]:
    """Parse the flat key = value grid format into one grid per family."""
    options = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"grid config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in {"families", "hurst", "k", "lengths", "reps",
                       "algorithms", "sigma2", "simulation"}:
            raise CliError(f"grid config line {lineno}: unknown key {key!r}")
        if not value:
            raise CliError(f"grid config line {lineno}: empty value for {key!r}")
        options[key] = (value, lineno)

    def _take(key, conv, default=None, required=False):
        if key not in options:
            if required:
                raise CliError(f"grid config: missing required key {key!r}")
            return default
        value, lineno = options[key]
        try:
            return [conv(v.strip()) for v in value.split(",")]
        except ValueError as exc:
            raise CliError(f"grid config line {lineno}: {exc}") from exc

    families = _take("families", Family, required=True)
    hurst = _take("hurst", float, required=True)
    ks = _take("k", float, default=[])
    lengths = _take("lengths", int, required=True)
    reps = _take("reps", int, default=[200])[0]
    algorithms = _take("algorithms", Algorithm, required=True)
    sigma2 = _take("sigma2", float, default=[1.0])[0]
    simulation = _take("simulation", str, default=["auto"])[0]

    grids = []
    for i, family in enumerate(families):
        if family in (Family.BFBM, Family.TFBM):
            if not ks:
                raise CliError(f"grid config: family {family.value} needs a k list")
            pairs = [(h, k) for h in hurst for k in ks]
        else:
            pairs = [(h, None) for h in hurst]
        try:
            grids.append(
                ExperimentGrid(
                    family=family,
                    pairs=tuple(pairs),
                    lengths=tuple(lengths),
                    algorithms=tuple(algorithms),
                    replicates=reps,
                    sigma2=sigma2,
                    # families draw from disjoint seed blocks
                    master_seed=master_seed + 1000003 * i,
                    simulation=simulation,
                )
            )
        except (ParameterError, ValueError) as exc:
            raise CliError(f"grid config: {exc}") from exc
    return grids


def _load_grid_text(name: str) -> str:
    if os.path.exists(name):
        with open(name, "r", encoding="utf-8") as fh:
            return fh.read()
    bundled = name if name.endswith(".grid") else f"{name}.grid"
    candidate = resources.files("selfsim.grids").joinpath(bundled)
    if candidate.is_file():
        return candidate.read_text(encoding="utf-8")
    raise CliError(f"--grid: no such file or bundled grid: {name!r}")


def _default_workers() -> int:
    env = os.environ.get("LAMPERTI_WORKERS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise CliError(f"LAMPERTI_WORKERS: {exc}") from exc
    return os.cpu_count() or 1


def _cmd_bench(args) -> int:
    grids = _parse_grid_config(_load_grid_text(args.grid), args.seed)
    workers = args.workers if args.workers is not None else _default_workers()
    if workers < 1:
        raise CliError(f"--workers: must be >= 1, got {workers}")
    tables = [run_grid(grid, workers=workers) for grid in grids]
    paths = export_tables(tables, args.out_dir)
    for grid in grids:
        sys.stdout.write(
            f"family={grid.family.value} cells={grid.n_cells} "
            f"reps={grid.replicates} master_seed={grid.master_seed}\n"
        )
    sys.stdout.write(
        f"wrote {paths['summary']}, {paths['replicates']}, {paths['heatmap']}\n"
    )
    return 0


def read_series_file(path: str) -> np.ndarray:
    """Whitespace/newline separated decimal values; '#' lines are comments."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            for token in line.split():
                values.append(float(token))
    return np.asarray(values, dtype=float)


def preprocess_series(values: np.ndarray, mode: str) -> np.ndarray:
    """'none', 'demean' (subtract the mean) or 'cumsum' (integrate demeaned)."""
    if mode == "none":
        return values.copy()
    if mode == "demean":
        return values - values.mean()
    if mode == "cumsum":
        return np.cumsum(values - values.mean())
    raise CliError(f"--preprocess: unknown mode {mode!r}")


def _cmd_nile(args) -> int:
    try:
        values = read_series_file(args.file)
    except OSError as exc:
        raise CliError(f"--file: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"--file: {exc}") from exc
    last_year = args.start_year + values.size - 1
    if args.from_year > args.to_year:
        raise CliError("--from-year must not exceed --to-year")
    if args.from_year < args.start_year or args.to_year > last_year:
        raise CliError(
            f"window {args.from_year}-{args.to_year} outside the file's range "
            f"{args.start_year}-{last_year}"
        )
    window = values[args.from_year - args.start_year:
                    args.to_year - args.start_year + 1]
    if window.size < 8:
        raise CliError(f"window holds {window.size} values; need at least 8")
    processed = preprocess_series(window, args.preprocess)
    path = SamplePath.from_observations(processed)
    result = run_algorithm(Algorithm.KURTOSIS, path)
    lines = [
        f"n = {window.size}",
        f"years = {args.from_year}-{args.to_year}",
        f"preprocess = {args.preprocess}",
        f"algorithm = {result.algorithm.value}",
        f"index_raw = {result.index_estimate:.17g}",
    ]
    for w in result.warnings:
        lines.append(f"warning = {w}")
    if args.bootstrap > 0:
        boot = bias_correct(
            path, Algorithm.KURTOSIS, B=args.bootstrap, rng=RngStream(args.seed, 0)
        )
        lines += [
            f"bootstrap_replicates = {boot.replicates}",
            f"bootstrap_mean = {boot.bootstrap_mean:.17g}",
            f"bootstrap_sd = {boot.bootstrap_sd:.17g}",
            f"index_bias_corrected = {boot.h_bias_corrected:.17g}",
        ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "bench": _cmd_bench,
    "nile": _cmd_nile,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DegenerateDataError as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SimulationError, EstimationError, BootstrapError, BracketError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
