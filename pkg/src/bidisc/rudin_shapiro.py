"""Flat polynomial pairs on the bi-torus and the counterexample assembly.

The pair ``(p_n, q_n)`` is built by the Rudin-Shapiro two-term recursion

    p_k = p_{k-1} + a_k * z**n_k * q_{k-1}(1/z)
    q_k = q_{k-1} - a_k * z**n_k * p_{k-1}(1/z)

from ``p_0 = 0``, ``q_0 = 1`` (coefficients are real, in ``[0, 1]``).  On the
torus the pair satisfies the exact flatness identity

    |p_n(z)|**2 + |q_n(conj z)|**2 = prod_k (1 + a_k**2),

which is what turns coefficient sums into certified sup-norm bounds.

The counterexample polynomials F and G are defined by inverting the squared
first-variable Euler derivative on ``p_n`` and ``q_n - 1``; they are kept as
source polynomials (see :mod:`bidisc.poly` views) and never materialized with
divided coefficients.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence, TYPE_CHECKING

from .errors import AntiDerivativeError, ChainViolation, CollisionError, EmptyInput
from .poly import (
    EulerOp,
    SparsePoly,
    antiderivative_view,
    linear_combine,
    reflect_shift,
    value_at_one,
)

if TYPE_CHECKING:  # pragma: no cover - import cycle guard for type checkers
    from .frequencies import ConditionReport, FreqSchedule

_TAU = 2.0 * math.pi


@dataclass(frozen=True)
class CoeffSchedule:
    """The real coefficient sequence ``a_1..a_n`` of a pair, each in [0, 1]."""

    n: int
    a: tuple[float, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.n < 0 or len(self.a) != self.n:
            raise ValueError(f"need exactly n={self.n} coefficients, got {len(self.a)}")
        for k, ak in enumerate(self.a, start=1):
            if not 0.0 <= ak <= 1.0:
                raise ValueError(f"a_{k} = {ak} outside [0, 1]")


@dataclass(frozen=True)
class ScalarTrace:
    """Values of the recursion at ``z = (1, 1)``, index 0 (base case) to n.

    ``flat[k]`` is the running flatness product ``prod_{j<=k} (1 + a_j**2)``;
    the identity ``p1[k]**2 + q1[k]**2 == flat[k]`` holds up to rounding.
    """

    p1: tuple[float, ...]
    q1: tuple[float, ...]
    flat: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.flat) - 1


def scalar_trace(schedule: CoeffSchedule) -> ScalarTrace:
    """Run the recursion at ``z = (1,1)``; O(n), no polynomials involved."""
    p, q, f = 0.0, 1.0, 1.0
    p1, q1, flat = [p], [q], [f]
    for ak in schedule.a:
        p, q = p + ak * q, q - ak * p
        f *= 1.0 + ak * ak
        p1.append(p)
        q1.append(q)
        flat.append(f)
    return ScalarTrace(tuple(p1), tuple(q1), tuple(flat))


@dataclass(frozen=True)
class SubsetSelection:
    """A subset of positions whose sum captures at least 1/pi of the total
    absolute mass.

    Positions are 1-based: ``A`` selects entries ``omega_1..omega_n``.
    ``branch`` records which of the two candidate sequences was used when the
    selection comes from a scalar trace (``"q"`` or ``"p"``), else ``None``.
    """

    A: tuple[int, ...]
    achieved: float
    total: float
    branch: Optional[str] = None


def _half_plane(omega: Sequence[complex], phi: float) -> tuple[int, ...]:
    u = cmath.exp(-1j * phi)
    return tuple(k for k, w in enumerate(omega, start=1) if (u * w).real > 0.0)


def select_subset(omega: Sequence[complex]) -> SubsetSelection:
    """Pick ``A`` with ``|sum_{k in A} omega_k| >= (1/pi) * sum_k |omega_k|``.

    Searches the finitely many half-planes ``{w : Re(e^{-i phi} w) > 0}``
    whose boundaries pass through the data: candidate directions are every
    ``arg(omega_k)``, the boundary angles ``arg(omega_k) +- pi/2`` and the
    midpoints of consecutive boundary angles (so each open cell between
    boundaries is represented; an averaging argument guarantees the optimum
    lives in one of them).  Ties go to the smallest direction in [0, 2 pi).
    """
    w = [complex(x) for x in omega]
    if not w:
        raise EmptyInput("omega must be nonempty")
    total = math.fsum(abs(x) for x in w)

    args = sorted({cmath.phase(x) % _TAU for x in w if x != 0})
    boundaries = sorted({(a + math.pi / 2) % _TAU for a in args}
                        | {(a - math.pi / 2) % _TAU for a in args})
    candidates = set(args) | set(boundaries)
    for i, b in enumerate(boundaries):
        b_next = boundaries[(i + 1) % len(boundaries)]
        if b_next <= b:
            b_next += _TAU
        candidates.add(((b + b_next) / 2.0) % _TAU)
    if not candidates:
        candidates = {0.0}

    best_val = -1.0
    best_members: tuple[int, ...] = ()
    for phi in sorted(candidates):
        members = _half_plane(w, phi)
        s = 0j
        for k in members:  # ascending index order, plain adds: reproducible
            s += w[k - 1]
        val = abs(s)
        if val > best_val:
            best_val, best_members = val, members
    return SubsetSelection(A=best_members, achieved=best_val, total=total)


def select_subset_from_trace(trace: ScalarTrace, schedule: CoeffSchedule) -> SubsetSelection:
    """Selection step of the pipeline: take the larger of the two candidate
    sequences ``a_k * q_{k-1}(1)`` and ``a_k * p_{k-1}(1)``, then select."""
    n = schedule.n
    omega_q = [schedule.a[k - 1] * trace.q1[k - 1] for k in range(1, n + 1)]
    omega_p = [schedule.a[k - 1] * trace.p1[k - 1] for k in range(1, n + 1)]
    tq = math.fsum(abs(x) for x in omega_q)
    tp = math.fsum(abs(x) for x in omega_p)
    if tq >= tp:
        sel = select_subset(omega_q)
        return SubsetSelection(sel.A, sel.achieved, sel.total, branch="q")
    sel = select_subset(omega_p)
    return SubsetSelection(sel.A, sel.achieved, sel.total, branch="p")


@dataclass(frozen=True)
class RSPair:
    """The pair ``(p, q)`` with the schedule and frequencies that built it."""

    p: SparsePoly
    q: SparsePoly
    schedule: CoeffSchedule
    freqs: "FreqSchedule"


def build_rs_pair(schedule: CoeffSchedule, freqs: "FreqSchedule") -> RSPair:
    """Run the recursion with the given coefficients and frequencies.

    Raises :class:`DominationError` if some frequency is too small to cover
    the exponents it must reflect, and :class:`CollisionError` if two branches
    ever produce the same exponent (the frequency sequence is not lacunary
    enough, or duplicated).
    """
    n = schedule.n
    if freqs.n != n:
        raise ValueError(f"schedule has n={n} but frequencies have n={freqs.n}")
    p = SparsePoly.zero()
    q = SparsePoly.constant(1.0)
    for k in range(1, n + 1):
        ak = schedule.a[k - 1]
        nk = freqs.freqs[k - 1]
        p_next = linear_combine(1.0, p, ak, reflect_shift(q, nk))
        q_next = linear_combine(1.0, q, -ak, reflect_shift(p, nk))
        grew = q.term_count if ak != 0.0 else 0
        if p_next.term_count != p.term_count + grew:
            raise CollisionError(f"exponent collision while extending p at step {k}")
        grew = p.term_count if ak != 0.0 else 0
        if q_next.term_count != q.term_count + grew:
            raise CollisionError(f"exponent collision while extending q at step {k}")
        p, q = p_next, q_next

    combined = set(p.exponents()) | set(q.exponents())
    if len(combined) != p.term_count + q.term_count:
        raise CollisionError("p and q share an exponent")

    trace = scalar_trace(schedule)
    v = value_at_one(p)
    if abs(v - trace.p1[n]) > 1e-9:
        raise CollisionError(
            f"value at 1 mismatch: polynomial gives {v}, scalar recursion {trace.p1[n]}"
        )
    return RSPair(p=p, q=q, schedule=schedule, freqs=freqs)


@dataclass(frozen=True)
class BoundsRecord:
    """Certified bound data attached to a counterexample bundle.

    ``upper_pure1`` bounds the sup of both squared first-variable Euler
    derivatives; ``upper_pure2`` the squared second-variable ones.  The mixed
    values are the exact-phase evaluations of the mixed Euler derivative at
    ``z = (1,1)``; ``chain_lower`` is the scalar-chain lower bound
    ``kappa * S / (2 pi) - 2`` with ``S = sum_k a_k * flat[k-1]**(1/2)``.
    """

    upper_pure1: float
    upper_pure2: float
    mixed_at_1_f: complex
    mixed_at_1_g: complex
    chain_lower: float

    @property
    def mixed_best(self) -> float:
        return max(abs(self.mixed_at_1_f), abs(self.mixed_at_1_g))


@dataclass
class CounterexampleBundle:
    """F and G represented through their squared-Euler-derivative sources."""

    f_source: SparsePoly        # equals p_n
    g_source: SparsePoly        # equals q_n - 1 (constant removed)
    kappa: Fraction             # exact dyadic ratio target
    bounds: BoundsRecord


def weighted_flat_sum(trace: ScalarTrace, schedule: CoeffSchedule) -> float:
    """``S = sum_{k=1..n} a_k * flat[k-1]**(1/2)`` (exactly-rounded sum)."""
    return math.fsum(
        schedule.a[k - 1] * math.sqrt(trace.flat[k - 1]) for k in range(1, schedule.n + 1)
    )


def _bounds_record(pair: RSPair, f_source: SparsePoly, g_source: SparsePoly,
                   kappa_value: float) -> BoundsRecord:
    trace = scalar_trace(pair.schedule)
    n = pair.schedule.n
    s = weighted_flat_sum(trace, pair.schedule)
    return BoundsRecord(
        upper_pure1=math.sqrt(trace.flat[n]) + 1.0,
        upper_pure2=math.sqrt(2.0) * kappa_value * kappa_value * s + 2.0,
        mixed_at_1_f=value_at_one(antiderivative_view(f_source, EulerOp.D1D2)),
        mixed_at_1_g=value_at_one(antiderivative_view(g_source, EulerOp.D1D2)),
        chain_lower=kappa_value * s / _TAU - 2.0,
    )


def assemble_counterexamples(pair: RSPair, kappa: Fraction) -> CounterexampleBundle:
    """Form the F/G sources ``p_n`` and ``q_n - 1`` and record their bounds.

    Every surviving exponent must have ``m1 >= 1`` so that the inverse Euler
    operator applies; the recursion guarantees this whenever the frequencies
    dominate, but it is checked here regardless.
    """
    f_source = pair.p
    g_source = linear_combine(1.0, pair.q, -1.0, SparsePoly.constant(1.0))
    for poly, label in ((f_source, "F"), (g_source, "G")):
        for (m1, _), _c in poly.iter_terms():
            if m1 == 0:
                raise AntiDerivativeError(f"{label} source keeps a term with m1 = 0")
            break  # canonical order: smallest m1 first
    return CounterexampleBundle(
        f_source=f_source,
        g_source=g_source,
        kappa=kappa,
        bounds=_bounds_record(pair, f_source, g_source, float(kappa)),
    )


def dyadic_quarter_root(n: int, bits: int = 20) -> Fraction:
    """``round(n**(-1/4) * 2**bits) / 2**bits`` with exact integer rounding.

    Round-half-up; the comparison against the half-grid point is done on
    fourth powers, so no floating point is involved.
    """
    if n < 1:
        raise ValueError("n must be positive")
    pow4 = 1 << (4 * bits)
    t = isqrt(isqrt(pow4 // n))          # floor(2**bits * n**(-1/4))
    if (2 * t + 1) ** 4 * n <= pow4 << 4:
        t += 1
    return Fraction(t, 1 << bits)


def paper_parameters(n: int, bits: int = 20) -> tuple[CoeffSchedule, Fraction]:
    """The standard parameterization: ``a_k = k**(-1/2)`` and the dyadic
    rounding of ``n**(-1/4)`` with denominator ``2**bits``."""
    if n < 1:
        raise ValueError("n must be positive")
    schedule = CoeffSchedule(
        n=n, a=tuple(k ** -0.5 for k in range(1, n + 1)), name="inverse_sqrt"
    )
    return schedule, dyadic_quarter_root(n, bits)


def certified_bounds(
    bundle: CounterexampleBundle,
    pair: RSPair,
    sel: SubsetSelection,
    report: "ConditionReport",
) -> BoundsRecord:
    """Recompute the bound record and check it against the selection sums.

    The mixed values at ``z = (1,1)`` must agree with ``kappa`` times the
    selected scalar sums up to the exact condition sums (i) + (iii); a
    violation means the schedule, the frequencies and the polynomials do not
    describe the same object.
    """
    if not report.passed:
        raise ChainViolation("condition report did not pass")
    record = _bounds_record(pair, bundle.f_source, bundle.g_source, float(bundle.kappa))

    trace = scalar_trace(pair.schedule)
    a = pair.schedule.a
    sum_q = math.fsum(a[k - 1] * trace.q1[k - 1] for k in sel.A)
    sum_p = math.fsum(a[k - 1] * trace.p1[k - 1] for k in sel.A)
    lhs = abs(
        (abs(record.mixed_at_1_f) + abs(record.mixed_at_1_g))
        - float(bundle.kappa) * (abs(sum_q) + abs(sum_p))
    )
    rhs = float(report.sum_i + report.sum_iii)
    if lhs > rhs:
        raise ChainViolation(
            f"mixed values at 1 deviate from kappa * selection sums by {lhs}, "
            f"allowed {rhs}"
        )
    return record


@dataclass(frozen=True)
class ScalarBounds:
    """Closed-form bound chain evaluated without building any polynomial.

    Scalar mode works with the real ``kappa = n**(-1/4)`` (there is nothing
    to certify in exact rational arithmetic here, so no dyadic rounding).
    """

    n: int
    kappa: float
    flat_n: float
    weighted_sum: float
    upper_pure1: float
    upper_pure2: float
    chain_lower: float


def scalar_bounds(n: int, schedule: Optional[CoeffSchedule] = None,
                  kappa: Optional[float] = None) -> ScalarBounds:
    """Evaluate the bound chain for a schedule without polynomial work."""
    if schedule is None:
        schedule = CoeffSchedule(
            n=n, a=tuple(k ** -0.5 for k in range(1, n + 1)), name="inverse_sqrt"
        )
    if schedule.n != n:
        raise ValueError("schedule level does not match n")
    if kappa is None:
        kappa = n ** -0.25
    trace = scalar_trace(schedule)
    s = weighted_flat_sum(trace, schedule)
    return ScalarBounds(
        n=n,
        kappa=kappa,
        flat_n=trace.flat[n],
        weighted_sum=s,
        upper_pure1=math.sqrt(trace.flat[n]) + 1.0,
        upper_pure2=math.sqrt(2.0) * kappa * kappa * s + 2.0,
        chain_lower=kappa * s / _TAU - 2.0,
    )
