"""End-to-end construction and independent re-verification of bundles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .errors import FileFormatError
from .frequencies import (
    ConditionReport,
    FreqSchedule,
    OrdinaryBounds,
    SchedulerConfig,
    schedule_and_verify,
    strong_mode_bounds,
    verify_conditions,
)
from .poly import EulerOp, antiderivative_view, value_at_one
from .rudin_shapiro import (
    CoeffSchedule,
    CounterexampleBundle,
    RSPair,
    ScalarTrace,
    SubsetSelection,
    assemble_counterexamples,
    build_rs_pair,
    certified_bounds,
    dyadic_quarter_root,
    paper_parameters,
    scalar_trace,
    select_subset_from_trace,
    weighted_flat_sum,
)
from .serialize import LoadedBundle, load_bundle, load_conditions

_TAU = 2.0 * math.pi


@dataclass
class ConstructionResult:
    """Everything produced by one certified construction."""

    mode: str
    kappa_bits: int
    schedule: CoeffSchedule
    trace: ScalarTrace
    selection: SubsetSelection
    freqs: FreqSchedule
    report: ConditionReport
    pair: RSPair
    bundle: CounterexampleBundle
    ordinary: Optional[OrdinaryBounds] = None

    @property
    def n(self) -> int:
        return self.schedule.n


def construct_level(
    n: int,
    mode: str = "standard",
    schedule: Optional[CoeffSchedule] = None,
    kappa: Optional[Fraction] = None,
    kappa_bits: int = 20,
    scheduler: Optional[SchedulerConfig] = None,
) -> ConstructionResult:
    """Build and certify one level: parameters, subset selection, frequency
    schedule, polynomial pair, counterexample bundle, certified bounds."""
    if n < 1:
        raise ValueError("n must be positive")
    if schedule is None:
        schedule, default_kappa = paper_parameters(n, kappa_bits)
    else:
        default_kappa = dyadic_quarter_root(n, kappa_bits)
    if kappa is None:
        kappa = default_kappa

    trace = scalar_trace(schedule)
    selection = select_subset_from_trace(trace, schedule)
    freqs, report = schedule_and_verify(n, selection.A, kappa, scheduler, mode)
    pair = build_rs_pair(schedule, freqs)
    bundle = assemble_counterexamples(pair, kappa)
    bundle.bounds = certified_bounds(bundle, pair, selection, report)
    ordinary = strong_mode_bounds(freqs, pair) if mode == "strong" else None
    return ConstructionResult(
        mode=mode,
        kappa_bits=kappa_bits,
        schedule=schedule,
        trace=trace,
        selection=selection,
        freqs=freqs,
        report=report,
        pair=pair,
        bundle=bundle,
        ordinary=ordinary,
    )


@dataclass(frozen=True)
class VerificationOutcome:
    ok: bool
    failures: tuple[str, ...]


def verify_loaded_bundle(loaded: LoadedBundle, tol: float = 1e-9,
                         enum_limit: int = 20) -> VerificationOutcome:
    """Re-check a loaded bundle from its files alone.

    Recomputes the exact condition sums from the schedule, every bound-record
    field from the certificates and stored coefficients, and the chain
    consistency inequality.  Nothing from the original construction run is
    trusted beyond what the files say.
    """
    failures: list[str] = []

    def check(ok: bool, message: str) -> None:
        if not ok:
            failures.append(message)

    check(loaded.schedule.n == loaded.n, "schedule level disagrees with bundle")
    check(len(loaded.a) == loaded.n, "coefficient count disagrees with level")
    check(0 < loaded.kappa <= 1, f"kappa {loaded.kappa} outside (0, 1]")
    if loaded.n > enum_limit or loaded.schedule.n != loaded.n or len(loaded.a) != loaded.n:
        if loaded.n > enum_limit:
            failures.append(f"level {loaded.n} exceeds enumeration limit {enum_limit}")
        return VerificationOutcome(False, tuple(failures))

    try:
        schedule = CoeffSchedule(n=loaded.n, a=loaded.a, name=loaded.schedule_name)
    except ValueError as exc:
        return VerificationOutcome(False, tuple(failures + [f"bad coefficients: {exc}"]))

    # Exact re-certification of the ratio conditions.
    report = verify_conditions(loaded.schedule, limit=enum_limit)
    check(report.passed, "frequency schedule fails the ratio conditions")
    if loaded.conditions_path is not None:
        try:
            stored = load_conditions(loaded.conditions_path)
            for name in ("sum_i", "sum_ii", "sum_iii"):
                check(
                    getattr(stored, name) == getattr(report, name),
                    f"stored {name} differs from recomputation",
                )
            check(stored.passed == report.passed, "stored pass flag differs")
        except FileFormatError as exc:
            failures.append(f"condition report unreadable: {exc}")

    # Certificates must be analytic with first exponents >= 1.
    for label, poly in (("F", loaded.f_source), ("G", loaded.g_source)):
        check(poly.analytic, f"{label} source not analytic")
        for (m1, _), _c in poly.iter_terms():
            check(m1 >= 1, f"{label} source has a term with m1 = 0")
            break

    # Bound record, recomputed from files.
    trace = scalar_trace(schedule)
    s = weighted_flat_sum(trace, schedule)
    kappa_f = float(loaded.kappa)
    bounds = loaded.bounds
    mixed_f = value_at_one(antiderivative_view(loaded.f_source, EulerOp.D1D2))
    mixed_g = value_at_one(antiderivative_view(loaded.g_source, EulerOp.D1D2))
    check(abs(mixed_f - bounds.mixed_at_1_f) <= tol, "mixed value at 1 for F differs")
    check(abs(mixed_g - bounds.mixed_at_1_g) <= tol, "mixed value at 1 for G differs")
    check(
        abs(bounds.upper_pure1 - (math.sqrt(trace.flat[loaded.n]) + 1.0)) <= tol,
        "stored upper_pure1 differs from flatness bound",
    )
    check(
        abs(bounds.upper_pure2 - (math.sqrt(2.0) * kappa_f * kappa_f * s + 2.0)) <= tol,
        "stored upper_pure2 differs from recomputation",
    )
    check(
        abs(bounds.chain_lower - (kappa_f * s / _TAU - 2.0)) <= tol,
        "stored chain_lower differs from recomputation",
    )

    # Selection sums and the chain consistency inequality.
    a = schedule.a
    sum_q = math.fsum(a[k - 1] * trace.q1[k - 1] for k in loaded.A)
    sum_p = math.fsum(a[k - 1] * trace.p1[k - 1] for k in loaded.A)
    if loaded.branch in ("q", "p"):
        recomputed = abs(sum_q) if loaded.branch == "q" else abs(sum_p)
        check(abs(recomputed - loaded.achieved) <= tol, "stored achieved sum differs")
        check(
            loaded.achieved >= loaded.total / math.pi - 1e-12,
            "selection misses the 1/pi guarantee",
        )
    lhs = abs(
        (abs(mixed_f) + abs(mixed_g)) - kappa_f * (abs(sum_q) + abs(sum_p))
    )
    check(
        lhs <= float(report.sum_i + report.sum_iii),
        "mixed values at 1 inconsistent with selection sums and condition sums",
    )

    return VerificationOutcome(ok=not failures, failures=tuple(failures))


def verify_bundle_file(path: Union[str, Path], tol: float = 1e-9,
                       enum_limit: int = 20) -> VerificationOutcome:
    """Load and re-verify a bundle file; raises FileFormatError on bad files."""
    return verify_loaded_bundle(load_bundle(path), tol=tol, enum_limit=enum_limit)
