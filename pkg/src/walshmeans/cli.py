"""Command-line driver: verification suites, convergence and weak-type scans.

Subcommands
-----------
verify    run every invariant suite and report one row per suite
converge  error of the averaged means against the input, over a log-spaced
          horizon grid (optionally with the identity-sequence baseline)
weaktype  level-set scans of the three maximal operators across a geometric
          threshold grid, with empirical weak-type constants
gen-seq   generate a sequence file (one integer per line, provenance header)

Reports are emitted as CSV (plot-ready, no timestamps, byte-stable for a
fixed config and seed) or JSON ({metadata, rows}; timestamps live only in the
JSON metadata).  Every row carries the hash of the scientific part of the
configuration.  Exit codes: 0 success, 2 verification failure, 3 bad
configuration, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import os
import platform
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .core import MAX_RESOLUTION, StepFunction, dyadic_maximal
from .corpus import builtin_function
from .errors import (
    ArgumentError,
    ConfigError,
    GenerationError,
    ResolutionError,
    WalshMeansError,
)
from .means import maximal_sigma, sigma_mean, stopped_mean_max, weak_type_scan
from .sequences import (
    Subsequence,
    gen_sequence,
    load_sequence,
    save_sequence,
)
from .verify import VerifyContext, run_verify

try:
    from importlib.metadata import version as _dist_version

    __version__ = _dist_version("walshmeans")
except Exception:  # not installed; running from a checkout
    __version__ = "0.1.0"

EXIT_OK = 0
EXIT_VERIFY_FAILED = 2
EXIT_CONFIG = 3
EXIT_IO = 4

SEQUENCE_KEYWORDS = ("minimal_growth", "lacunary", "polynomial")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on; hashable canonical form for provenance."""

    resolution: int = 13
    sequence: str = "minimal_growth"
    delta: float = 0.5
    a1: int = 1
    n_max: int | None = None
    function: str = "spike:6"
    lambda_min: float = 2.0**-8
    lambda_max: float = 2.0**8
    lambda_count: int = 33
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    quick: bool = False
    baseline: bool = False
    corrupt: str | None = None

    def validate(self) -> None:
        if not 0 <= self.resolution <= MAX_RESOLUTION:
            raise ConfigError(
                f"resolution must lie in [0, {MAX_RESOLUTION}], got {self.resolution}"
            )
        if not self.lambda_min > 0:
            raise ConfigError(f"lambda_min must be positive, got {self.lambda_min}")
        if self.lambda_max < self.lambda_min:
            raise ConfigError("lambda_max must be >= lambda_min")
        if self.lambda_count < 1:
            raise ConfigError(f"lambda_count must be >= 1, got {self.lambda_count}")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.a1 < 1:
            raise ConfigError(f"a1 must be >= 1, got {self.a1}")

    def scientific_fields(self) -> dict:
        """The fields that determine results (output destination excluded)."""
        payload = asdict(self)
        payload.pop("out")
        payload.pop("fmt")
        return payload

    def hash(self) -> str:
        canon = json.dumps(self.scientific_fields(), sort_keys=True)
        return hashlib.sha256(canon.encode("ascii")).hexdigest()[:16]

    def lambda_grid(self) -> np.ndarray:
        if self.lambda_count == 1:
            return np.array([self.lambda_min])
        return np.geomspace(self.lambda_min, self.lambda_max, self.lambda_count)


@dataclass
class ExperimentReport:
    command: str
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)


def _metadata(config: ExperimentConfig, command: str, **extra) -> dict:
    md = {
        "command": command,
        "config": config.scientific_fields(),
        "config_hash": config.hash(),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    md.update(extra)
    return md


def _fmt_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def emit_report(report: ExperimentReport, fmt: str, path: str | None) -> None:
    """Write the report; CSV carries only columns and rows, JSON adds metadata."""
    if fmt == "csv":
        lines = [",".join(report.columns)]
        for row in report.rows:
            lines.append(",".join(_fmt_cell(row.get(c)) for c in report.columns))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = {
            "command": report.command,
            "columns": report.columns,
            "metadata": report.metadata,
            "rows": report.rows,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_report(path: str) -> ExperimentReport:
    """Read back a JSON report; the result compares equal to the original."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return ExperimentReport(
        payload["command"], payload["columns"], payload["rows"], payload["metadata"]
    )


def build_sequence(
    config: ExperimentConfig, resolution: int, *, strict: bool
) -> Subsequence:
    """Materialize the configured sequence, sized for the working resolution.

    ``strict`` demands a(N) < 2^M (needed by the decomposition-based
    operators); otherwise a(N) <= 2^M.  An explicit n_max that does not fit
    raises :class:`ConfigError` naming the largest admissible N.
    """
    spec = config.sequence
    if os.path.exists(spec) and spec not in SEQUENCE_KEYWORDS:
        seq = load_sequence(spec)
    else:
        name, _, arg = spec.partition(":")
        limit = 1 << resolution
        try:
            if name == "minimal_growth":
                seq = gen_sequence(
                    "minimal_growth",
                    config.n_max,
                    delta=config.delta,
                    a1=config.a1,
                    limit=limit,
                )
            elif name == "lacunary":
                ratio = float(arg) if arg else 2.0
                seq = gen_sequence(
                    "lacunary", config.n_max, ratio=ratio, a1=config.a1, limit=limit
                )
            elif name == "polynomial":
                degree = int(arg) if arg else 1
                seq = gen_sequence(
                    "polynomial", config.n_max, degree=degree, limit=limit
                )
            else:
                raise ConfigError(
                    f"sequence {spec!r} is neither a readable file nor one of"
                    f" {SEQUENCE_KEYWORDS}"
                )
        except (ArgumentError, GenerationError) as exc:
            raise ConfigError(f"cannot build sequence {spec!r}: {exc}") from exc
    admissible = seq.admissible_count(resolution, strict=strict)
    if admissible < 1:
        raise ConfigError(
            f"sequence {spec!r} starts above the resolution bound 2^{resolution}"
        )
    if config.n_max is not None:
        if config.n_max > len(seq):
            raise ConfigError(
                f"sequence {spec!r} defines {len(seq)} terms, n_max={config.n_max}"
            )
        if config.n_max > admissible:
            raise ConfigError(
                f"n_max={config.n_max} exceeds the resolution bound;"
                f" largest admissible N is {admissible}"
            )
        return seq.truncated(config.n_max)
    return seq.truncated(admissible)


def _load_function(config: ExperimentConfig) -> StepFunction:
    spec = config.function
    if os.path.exists(spec):
        try:
            with open(spec, "r", encoding="utf-8") as fh:
                f = StepFunction.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, ArgumentError) as exc:
            raise ConfigError(f"cannot load function from {spec!r}: {exc}") from exc
        if f.resolution != config.resolution:
            raise ConfigError(
                f"function file has resolution {f.resolution}, configured"
                f" {config.resolution}"
            )
        return f
    try:
        return builtin_function(spec, config.resolution, seed=config.seed)
    except (ArgumentError, ResolutionError) as exc:
        raise ConfigError(f"cannot build function {spec!r}: {exc}") from exc


def cmd_verify(config: ExperimentConfig) -> tuple[ExperimentReport, int]:
    """Run all verification suites; exit status 2 when any fails."""
    config.validate()
    ctx = VerifyContext(
        resolution=config.resolution,
        seed=config.seed,
        quick=config.quick,
        corrupt=config.corrupt,
    )
    results = run_verify(ctx)
    chash = config.hash()
    rows = []
    for r in results:
        rows.append(
            {
                "suite": r.suite,
                "instances_checked": r.instances,
                "max_residual": r.max_residual,
                "pass": r.passed,
                "details": r.details,
                "config_hash": chash,
            }
        )
    report = ExperimentReport(
        "verify",
        ["suite", "instances_checked", "max_residual", "pass", "details", "config_hash"],
        rows,
        _metadata(config, "verify"),
    )
    failed = [r.suite for r in results if not r.passed]
    status = EXIT_VERIFY_FAILED if failed else EXIT_OK
    return report, status


def _horizon_grid(n_max: int) -> list[int]:
    """Log-spaced horizons, always containing 1, 2, 4 and the endpoint."""
    picks = {1, 2, 4, n_max}
    if n_max > 4:
        picks.update(
            int(round(x)) for x in np.geomspace(4, n_max, 12)
        )
    return sorted(n for n in picks if 1 <= n <= n_max)


def cmd_converge(config: ExperimentConfig) -> tuple[ExperimentReport, int]:
    """Error of sigma_N against f over a horizon grid (plus optional baseline)."""
    config.validate()
    f = _load_function(config)
    seq = build_sequence(config, config.resolution, strict=False)
    chash = config.hash()
    rows = []

    def add_rows(label: str, sequence: Subsequence) -> None:
        for n in _horizon_grid(len(sequence)):
            diff = np.abs(sigma_mean(f, sequence, n).values - f.values)
            rows.append(
                {
                    "sequence": label,
                    "N": n,
                    "a_N": sequence.a(n),
                    "l1_error": float(diff.mean()),
                    "sup_error": float(diff.max()),
                    "q90_error": float(np.quantile(diff, 0.9)),
                    "config_hash": chash,
                }
            )

    add_rows("main", seq)
    if config.baseline:
        ident = gen_sequence(
            "polynomial", min(len(seq), 1 << config.resolution), degree=1
        )
        add_rows("fejer_baseline", ident)
    report = ExperimentReport(
        "converge",
        ["sequence", "N", "a_N", "l1_error", "sup_error", "q90_error", "config_hash"],
        rows,
        _metadata(config, "converge", horizon=len(seq)),
    )
    return report, EXIT_OK


def cmd_weaktype(config: ExperimentConfig) -> tuple[ExperimentReport, int]:
    """Level-set scans for the dyadic, averaged and stopped maximal operators."""
    config.validate()
    f = _load_function(config)
    norm1 = f.l1_norm()
    if norm1 <= 0:
        raise ConfigError(f"function {config.function!r} has zero mass")
    grid = config.lambda_grid()
    chash = config.hash()
    rows = []
    constants: dict[str, float] = {}

    def add_scan(operator: str, scan_rows) -> None:
        best = 0.0
        for row in scan_rows:
            best = max(best, row.ratio)
            rows.append(
                {
                    "row_kind": "scan",
                    "operator": operator,
                    "lambda": row.threshold,
                    "level_set_measure": row.measure,
                    "ratio": row.ratio,
                    "config_hash": chash,
                }
            )
        constants[operator] = best

    add_scan("dyadic_maximal", weak_type_scan(dyadic_maximal(f), norm1, grid))

    seq_plain = build_sequence(config, config.resolution, strict=False)
    add_scan(
        "sigma_maximal",
        weak_type_scan(maximal_sigma(f, seq_plain, len(seq_plain)), norm1, grid),
    )

    seq_strict = build_sequence(config, config.resolution, strict=True)
    stopped_rows = []
    for lam in grid:
        t_star = stopped_mean_max(f, seq_strict, float(lam), len(seq_strict))
        stopped_rows.extend(weak_type_scan(t_star, norm1, [float(lam)]))
    add_scan("stopped_maximal", stopped_rows)

    for operator in ("dyadic_maximal", "sigma_maximal", "stopped_maximal"):
        rows.append(
            {
                "row_kind": "summary",
                "operator": operator,
                "lambda": None,
                "level_set_measure": None,
                "ratio": constants[operator],
                "config_hash": chash,
            }
        )
    report = ExperimentReport(
        "weaktype",
        ["row_kind", "operator", "lambda", "level_set_measure", "ratio", "config_hash"],
        rows,
        _metadata(
            config,
            "weaktype",
            horizon_sigma=len(seq_plain),
            horizon_stopped=len(seq_strict),
        ),
    )
    return report, EXIT_OK


def cmd_gen_seq(config: ExperimentConfig) -> tuple[None, int]:
    """Generate a sequence and write it in the one-integer-per-line format."""
    config.validate()
    if config.out is None:
        raise ConfigError("gen-seq needs --out")
    if config.n_max is None:
        raise ConfigError("gen-seq needs --n-max")
    name, _, arg = config.sequence.partition(":")
    try:
        if name == "minimal_growth":
            seq = gen_sequence(
                "minimal_growth", config.n_max, delta=config.delta, a1=config.a1
            )
        elif name == "lacunary":
            seq = gen_sequence(
                "lacunary",
                config.n_max,
                ratio=float(arg) if arg else 2.0,
                a1=config.a1,
            )
        elif name == "polynomial":
            seq = gen_sequence(
                "polynomial", config.n_max, degree=int(arg) if arg else 1
            )
        else:
            raise ConfigError(f"unknown sequence kind {config.sequence!r}")
    except GenerationError as exc:
        raise ConfigError(
            f"generation overflowed 2^62: {exc} (largest valid N is"
            f" {exc.max_valid_terms})"
        ) from exc
    except ArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    save_sequence(seq, config.out)
    return None, EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walshmeans",
        description=(
            "Averaging of Walsh partial sums along growth-constrained"
            " subsequences: verification suites and experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, function=True, lambdas=False):
        p.add_argument("--resolution", type=int, default=13,
                       help="dyadic resolution M (2^M cells)")
        p.add_argument("--delta", type=float, default=0.5,
                       help="growth parameter for minimal_growth sequences")
        p.add_argument("--sequence", default="minimal_growth",
                       help="minimal_growth | lacunary[:q] | polynomial[:d] |"
                            " path to a sequence file")
        p.add_argument("--a1", type=int, default=1, help="first sequence term")
        p.add_argument("--n-max", type=int, default=None,
                       help="number of averaged terms (default: resolution limit)")
        if function:
            p.add_argument("--function", default="spike:6",
                           help="builtin spec (e.g. spike:6, random_step:0.5,"
                                " walsh_poly:1,0,2) or JSON file path")
        if lambdas:
            p.add_argument("--lambda-min", type=float, default=2.0**-8)
            p.add_argument("--lambda-max", type=float, default=2.0**8)
            p.add_argument("--lambda-count", type=int, default=33)
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default="csv")

    p_verify = sub.add_parser("verify", help="run every invariant suite")
    common(p_verify, function=False)
    p_verify.add_argument("--quick", action="store_true",
                          help="reduced ranges for smoke testing")
    p_verify.add_argument("--corrupt", default=None, help=argparse.SUPPRESS)

    p_conv = sub.add_parser("converge", help="averaged-mean error vs horizon")
    common(p_conv)
    p_conv.add_argument("--baseline", action="store_true",
                        help="add identity-sequence (classical mean) rows")

    p_weak = sub.add_parser("weaktype", help="maximal-operator level-set scans")
    common(p_weak, lambdas=True)

    p_gen = sub.add_parser("gen-seq", help="write a sequence file")
    common(p_gen, function=False)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    fields = {
        "resolution": args.resolution,
        "sequence": args.sequence,
        "delta": args.delta,
        "a1": args.a1,
        "n_max": args.n_max,
        "seed": args.seed,
        "out": args.out,
        "fmt": args.fmt,
    }
    for name in ("function", "lambda_min", "lambda_max", "lambda_count",
                 "quick", "baseline", "corrupt"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    return ExperimentConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "verify":
            report, status = cmd_verify(config)
            for row in report.rows:
                flag = "pass" if row["pass"] else "FAIL"
                line = (f"{row['suite']:<36} {flag}  instances="
                        f"{row['instances_checked']}  max_residual="
                        f"{row['max_residual']:.3e}")
                if row["details"]:
                    line += f"  [{row['details']}]"
                print(line, file=sys.stderr)
        elif args.command == "converge":
            report, status = cmd_converge(config)
        elif args.command == "weaktype":
            report, status = cmd_weaktype(config)
        elif args.command == "gen-seq":
            _, status = cmd_gen_seq(config)
            return status
        else:  # unreachable with required=True
            return EXIT_CONFIG
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WalshMeansError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if config.out is not None or args.command != "verify":
            emit_report(report, config.fmt, config.out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
