"""Command-line front end: construct, scan, verify, roundtrip.

Exit codes are a contract so CI can gate on certification:
0 = success / verified, 1 = verification failure, 2 = bad input or bad file.
Domain errors additionally emit one machine-readable JSON record on stderr.

A JSON config file (path in the ``BIDISC_CONFIG`` environment variable)
overrides the built-in defaults; command-line flags override both.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import serialize
from .errors import BidiscError, FileFormatError
from .frequencies import SchedulerConfig
from .norms import GridSpec, growth_scan, norm_report
from .pipeline import construct_level, verify_loaded_bundle

log = logging.getLogger("bidisc")

CONFIG_ENV = "BIDISC_CONFIG"

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2


@dataclass
class Config:
    """Persistent defaults; every field can be overridden by a flag."""

    grid: int = 512
    samples: int = 100
    seed: int = 1
    kappa_bits: int = 20
    growth: float = 2.0            # lambda of the initial base 3**ceil(lambda*n)
    initial_base: Optional[int] = None
    max_base: int = 1 << 4096
    enum_limit: int = 20
    out_dir: str = "."

    def __post_init__(self) -> None:
        if self.grid < 2 or self.grid & (self.grid - 1):
            raise ValueError("grid must be a power of two >= 2")
        for name in ("samples", "kappa_bits", "enum_limit", "max_base"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def grid_spec(self) -> GridSpec:
        return GridSpec(size=self.grid, samples=self.samples, seed=self.seed)

    def scheduler(self) -> SchedulerConfig:
        return SchedulerConfig(
            growth=self.growth,
            initial_base=self.initial_base,
            max_base=self.max_base,
            enum_limit=self.enum_limit,
        )


def load_config(path: Optional[str] = None) -> Config:
    """Defaults, overridden by the JSON file named by ``BIDISC_CONFIG``."""
    path = path if path is not None else os.environ.get(CONFIG_ENV)
    if not path:
        return Config()
    try:
        with open(path) as handle:
            obj = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise FileFormatError(f"config {path} must hold a JSON object")
    known = {f.name for f in dataclasses.fields(Config)}
    values = {}
    for key, value in obj.items():
        if key not in known:
            log.warning("%s: ignoring unknown config key %r", path, key)
            continue
        values[key] = value
    try:
        return Config(**values)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"bad config {path}: {exc}") from exc


def _error_record(exc: BaseException) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)


def _apply_overrides(cfg: Config, args: argparse.Namespace) -> Config:
    mapping = {
        "grid": "grid",
        "kappa_bits": "kappa_bits",
        "growth": "growth",
        "base": "initial_base",
        "max_base": "max_base",
        "seed": "seed",
        "out": "out_dir",
    }
    updates = {}
    for flag, field in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            updates[field] = value
    return dataclasses.replace(cfg, **updates)


def _cmd_construct(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(), args)
    if args.n < 1:
        raise ValueError(f"--n must be positive, got {args.n}")
    if args.n > cfg.enum_limit:
        raise ValueError(
            f"--n {args.n} exceeds the enumeration limit {cfg.enum_limit}"
        )
    result = construct_level(
        args.n,
        mode=args.mode,
        kappa_bits=cfg.kappa_bits,
        scheduler=cfg.scheduler(),
    )
    out = Path(cfg.out_dir)
    paths = serialize.save_bundle(result, out)
    report = norm_report(result.bundle, cfg.grid_spec(), pair=result.pair)
    serialize.save_norm_table(report, out / "norms.txt")
    print(f"constructed level {args.n} ({args.mode}); base {result.freqs.base}")
    print(f"bundle:     {paths['bundle']}")
    print(f"schedule:   {paths['schedule']}")
    print(f"conditions: {paths['conditions']}")
    print(f"norms:      {out / 'norms.txt'}")
    print(f"mixed best {result.bundle.bounds.mixed_best:.6f} / "
          f"pure bounds {result.bundle.bounds.upper_pure1:.6f}, "
          f"{result.bundle.bounds.upper_pure2:.6f}")
    if result.ordinary is not None:
        print(f"ordinary-derivative sums: {result.ordinary.s_val:.3e}, "
              f"{result.ordinary.s_d1:.3e}, {result.ordinary.s_d2:.3e}")
    return EXIT_OK


def _cmd_scan(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(), args)
    if args.n_min < 1 or args.n_max < args.n_min or args.step < 1:
        raise ValueError("empty or invalid scan range")
    levels = list(range(args.n_min, args.n_max + 1, args.step))
    table = growth_scan(
        levels,
        scalar_only=args.scalar_only,
        scheduler=cfg.scheduler(),
        kappa_bits=cfg.kappa_bits,
    )
    csv_path = Path(args.csv) if args.csv else Path(cfg.out_dir) / "scan.csv"
    serialize.save_scan_csv(table, csv_path)
    print(f"scan of {len(levels)} levels -> {csv_path}")
    if args.plot:
        serialize.plot_scan(table, args.plot)
        print(f"plot -> {args.plot}")
    for row in table.rows:
        ratio = f"{row.ratio_c:.6f}" if row.ratio_c is not None else "-"
        print(f"  n={row.n:<6d} ratio_c={ratio:<10} chain_lower={row.chain_lower:.4f} "
              f"[{row.status}]")
    return EXIT_OK if table.completed else EXIT_VERIFY_FAILED


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(), args)
    loaded = serialize.load_bundle(args.bundle)
    outcome = verify_loaded_bundle(loaded, enum_limit=cfg.enum_limit)
    if outcome.ok:
        print(f"{args.bundle}: verified (level {loaded.n}, mode {loaded.mode})")
        return EXIT_OK
    print(f"{args.bundle}: VERIFICATION FAILED")
    for failure in outcome.failures:
        print(f"  - {failure}")
    return EXIT_VERIFY_FAILED


def _cmd_roundtrip(args: argparse.Namespace) -> int:
    loaded = serialize.load_bundle(args.bundle)
    original = Path(args.bundle).read_bytes()
    resaved = serialize.loaded_bundle_text(loaded).encode()
    schedule_original = loaded.schedule_path.read_bytes()
    schedule_resaved = serialize.schedule_text(loaded.schedule, loaded.kappa_bits).encode()
    if resaved == original and schedule_resaved == schedule_original:
        print(f"{args.bundle}: round trip is byte-identical")
        return EXIT_OK
    print(f"{args.bundle}: round trip differs from the original serialization")
    return EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bidisc",
        description="Construct and certify polynomial counterexamples for "
                    "mixed Euler-derivative bounds on the bi-disc.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--grid", type=int, help="lattice order (power of two)")
        p.add_argument("--kappa-bits", dest="kappa_bits", type=int,
                       help="dyadic denominator exponent of kappa")
        p.add_argument("--lambda", dest="growth", type=float,
                       help="initial-base growth exponent")
        p.add_argument("--base", type=int, help="initial generator base")
        p.add_argument("--max-base", dest="max_base", type=int)
        p.add_argument("--seed", type=int, help="seed for sampled grid points")
        p.add_argument("--out", help="output directory")

    construct = sub.add_parser("construct", help="build and certify one level")
    construct.add_argument("--n", type=int, required=True, help="construction level")
    construct.add_argument("--mode", choices=("standard", "strong"),
                           default="standard")
    common(construct)
    construct.set_defaults(func=_cmd_construct)

    scan = sub.add_parser("scan", help="tabulate the bound chain over levels")
    scan.add_argument("--n-min", dest="n_min", type=int, required=True)
    scan.add_argument("--n-max", dest="n_max", type=int, required=True)
    scan.add_argument("--step", type=int, default=1)
    scan.add_argument("--scalar-only", dest="scalar_only", action="store_true",
                      help="skip polynomial builds, scalar chain only")
    scan.add_argument("--csv", help="CSV output path (default: <out>/scan.csv)")
    scan.add_argument("--plot", help="optional SVG/PDF plot path")
    common(scan)
    scan.set_defaults(func=_cmd_scan)

    verify = sub.add_parser("verify", help="independently re-check a bundle")
    verify.add_argument("bundle", help="path to a bundle file")
    common(verify)
    verify.set_defaults(func=_cmd_verify)

    roundtrip = sub.add_parser(
        "roundtrip", help="check that load + save reproduces a bundle exactly")
    roundtrip.add_argument("bundle", help="path to a bundle file")
    roundtrip.set_defaults(func=_cmd_roundtrip)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        _error_record(exc)
        return EXIT_BAD_INPUT
    except ValueError as exc:
        _error_record(exc)
        return EXIT_BAD_INPUT
    except BidiscError as exc:
        _error_record(exc)
        return EXIT_VERIFY_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
