"""Lacunary frequency schedules and their exact certification.

A schedule is a sequence ``n_1 .. n_n`` of exponent pairs growing fast enough
that every alternating subset sum

    m(M) = n_{i_0} - n_{i_1} + n_{i_2} - ...   (indices of M descending)

stays in the positive quadrant, and such that the ratios ``m(M)_2 / m(M)_1``
cluster near the dyadic target ``kappa`` for subsets whose maximum lies in
the chosen set ``A`` and near zero otherwise.  Generation is heuristic
(powers of a base, doubled until acceptance); certification is exact: the
condition sums are accumulated as unreduced integer fractions on GMP
integers, so a reported ``passed`` is a proof, not an estimate.

Plain Python integers are too slow for those sums: at level 12 the common
denominator already has ~5*10**5 digits, where CPython's quadratic gcd and
str() take minutes while GMP needs milliseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import gmpy2
from gmpy2 import mpz

from .errors import BaseOverflow, EnumTooLarge, ModeError
from .poly import ExpPair
from .rudin_shapiro import RSPair


class ExactRatio:
    """An exact nonnegative rational kept as an unreduced ``num/den`` pair.

    Comparison and addition cross-multiply; nothing ever computes a gcd
    unless :meth:`as_fraction` is called explicitly, so the type stays fast
    even when the denominator has millions of digits.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Union[int, mpz], den: Union[int, mpz] = 1) -> None:
        num, den = mpz(num), mpz(den)
        if den == 0:
            raise ZeroDivisionError("ExactRatio with zero denominator")
        if den < 0:
            num, den = -num, -den
        self.num = num
        self.den = den

    @classmethod
    def from_fraction(cls, f: Fraction) -> "ExactRatio":
        return cls(f.numerator, f.denominator)

    def _coerce(self, other: object) -> Optional["ExactRatio"]:
        if isinstance(other, ExactRatio):
            return other
        if isinstance(other, int):
            return ExactRatio(other)
        if isinstance(other, Fraction):
            return ExactRatio.from_fraction(other)
        return None

    def __add__(self, other: object) -> "ExactRatio":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactRatio(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __eq__(self, other: object) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num * o.den == o.num * self.den

    def __lt__(self, other: object) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num * o.den < o.num * self.den

    def __le__(self, other: object) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num * o.den <= o.num * self.den

    def __float__(self) -> float:
        return float(self.num / self.den)  # mpz/mpz -> correctly rounded mpfr

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def as_fraction(self) -> Fraction:
        """Reduced value; triggers one (possibly large) gcd."""
        g = gmpy2.gcd(self.num, self.den)
        return Fraction(int(self.num // g), int(self.den // g))

    def as_string(self) -> str:
        """Decimal ``num/den`` text, not necessarily in lowest terms."""
        return f"{self.num.digits()}/{self.den.digits()}"

    @classmethod
    def from_string(cls, text: str) -> "ExactRatio":
        num, _, den = text.partition("/")
        return cls(mpz(num), mpz(den) if den else 1)

    def __repr__(self) -> str:
        if self.den.bit_length() < 64:
            return f"ExactRatio({int(self.num)}, {int(self.den)})"
        return f"ExactRatio(~{float(self):.6g})"


def exact_sum(pairs: Iterable[tuple[mpz, mpz]]) -> ExactRatio:
    """Sum exact fractions by balanced pairwise merging, no reductions."""
    items = [(mpz(n), mpz(d)) for n, d in pairs]
    if not items:
        return ExactRatio(0, 1)
    while len(items) > 1:
        merged = []
        for i in range(0, len(items) - 1, 2):
            n1, d1 = items[i]
            n2, d2 = items[i + 1]
            merged.append((n1 * d2 + n2 * d1, d1 * d2))
        if len(items) % 2:
            merged.append(items[-1])
        items = merged
    return ExactRatio(*items[0])


@dataclass(frozen=True)
class SchedulerConfig:
    """Knobs of the frequency generator."""

    growth: float = 2.0                  # lambda in the initial base 3**ceil(lambda*n)
    initial_base: Optional[int] = None   # override the 3-power starting point
    max_base: int = 1 << 4096
    enum_limit: int = 20                 # refuse enumerations beyond 2**20 subsets

    def start_base(self, n: int) -> int:
        if self.initial_base is not None:
            return self.initial_base
        return 3 ** max(2, math.ceil(self.growth * n))


@dataclass(frozen=True)
class FreqSchedule:
    """A generated (or hand-made) frequency sequence with its parameters."""

    n: int
    freqs: tuple[ExpPair, ...]
    kappa: Fraction
    A: tuple[int, ...]
    base: int
    mode: str = "standard"

    def __post_init__(self) -> None:
        if len(self.freqs) != self.n:
            raise ValueError(f"need n={self.n} frequencies, got {len(self.freqs)}")
        if self.mode not in ("standard", "strong"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not all(1 <= k <= self.n for k in self.A):
            raise ValueError("A must be a subset of {1..n}")

    @property
    def domination_ok(self) -> bool:
        """Each frequency strictly exceeds the coordinatewise sum of all
        earlier ones (this is what forces every m(M) into the positive
        quadrant)."""
        s1 = s2 = 0
        for f1, f2 in self.freqs:
            if f1 <= s1 or f2 <= s2:
                return False
            s1 += f1
            s2 += f2
        return True

    @property
    def strong_ok(self) -> bool:
        """First coordinates exceed 2**(k**2) (ordinary-derivative regime)."""
        return all(f1 > 1 << (k * k) for k, (f1, _) in enumerate(self.freqs, start=1))


@dataclass(frozen=True, slots=True)
class SignedSumEntry:
    """One alternating subset sum, with its subset as a bitmask."""

    mask: int
    max_index: int
    odd: bool          # odd subset cardinality (these feed p / F)
    m: ExpPair


def enumerate_signed_sums(sched: FreqSchedule, limit: int = 20) -> list[SignedSumEntry]:
    """All ``2**n - 1`` alternating sums m(M) over nonempty subsets.

    Built by doubling: the entries with maximum k are ``n_k - m(M')`` over
    all strictly earlier subsets M' (including the empty one).
    """
    n = sched.n
    if n > limit:
        raise EnumTooLarge(f"n={n} exceeds enumeration limit {limit}")
    entries: list[SignedSumEntry] = []
    for k in range(1, n + 1):
        f1, f2 = sched.freqs[k - 1]
        bit = 1 << (k - 1)
        new = [SignedSumEntry(mask=bit, max_index=k, odd=True, m=(f1, f2))]
        for prev in entries:
            m1, m2 = prev.m
            new.append(
                SignedSumEntry(
                    mask=prev.mask | bit,
                    max_index=k,
                    odd=not prev.odd,
                    m=(f1 - m1, f2 - m2),
                )
            )
        entries.extend(new)
    return entries


@dataclass(frozen=True)
class ConditionReport:
    """Exact certification of the ratio conditions of a schedule.

    ``sum_i``  : sum over subsets with max in A of |m2/m1 - kappa|
    ``sum_ii`` : same class, |(m2/m1)**2 - kappa**2|
    ``sum_iii``: subsets with max outside A, m2/m1
    ``iv_ok``  : every m(M) in the positive quadrant with m1 >= 1

    ``passed`` means the three sums are < 1 and ``iv_ok`` holds.  The
    standing ratio assumption m2/m1 <= 1 is reported separately and does not
    gate ``passed``.
    """

    sum_i: ExactRatio
    sum_ii: ExactRatio
    sum_iii: ExactRatio
    iv_ok: bool
    ratio_le_one: bool
    passed: bool
    counts: dict[str, int]


def verify_conditions(sched: FreqSchedule, limit: int = 20) -> ConditionReport:
    """Evaluate the ratio conditions by exact enumeration.

    Everything is integer arithmetic: for ``kappa = p/q`` the class-A terms
    are ``|m2*q - p*m1| / (m1*q)`` and their squared analogues; sums are
    accumulated unreduced.  Entries that already violate positivity are
    excluded from the ratio sums and reported through ``iv_ok``.
    """
    entries = enumerate_signed_sums(sched, limit)
    in_a = set(sched.A)
    p = mpz(sched.kappa.numerator)
    q = mpz(sched.kappa.denominator)
    p2, q2 = p * p, q * q

    terms_i: list[tuple[mpz, mpz]] = []
    terms_ii: list[tuple[mpz, mpz]] = []
    terms_iii: list[tuple[mpz, mpz]] = []
    iv_ok = True
    ratio_le_one = True
    for entry in entries:
        m1, m2 = mpz(entry.m[0]), mpz(entry.m[1])
        if m1 < 1 or m2 < 0:
            iv_ok = False
            continue
        if m2 > m1:
            ratio_le_one = False
        if entry.max_index in in_a:
            terms_i.append((abs(m2 * q - p * m1), m1 * q))
            terms_ii.append((abs(m2 * m2 * q2 - p2 * m1 * m1), m1 * m1 * q2))
        else:
            terms_iii.append((m2, m1))

    sum_i = exact_sum(terms_i)
    sum_ii = exact_sum(terms_ii)
    sum_iii = exact_sum(terms_iii)
    passed = iv_ok and sum_i < 1 and sum_ii < 1 and sum_iii < 1
    return ConditionReport(
        sum_i=sum_i,
        sum_ii=sum_ii,
        sum_iii=sum_iii,
        iv_ok=iv_ok,
        ratio_le_one=ratio_le_one,
        passed=passed,
        counts={
            "in_A": len(terms_i),
            "off_A": len(terms_iii),
            "invalid": len(entries) - len(terms_i) - len(terms_iii),
            "total": len(entries),
        },
    )


def _round_half_up(num: int, den: int) -> int:
    # round(num/den) with halves up; num >= 0, den > 0
    return (2 * num + den) // (2 * den)


def _generate(n: int, in_a: set[int], kappa: Fraction, base: int, mode: str
              ) -> Optional[list[ExpPair]]:
    """One generation attempt; None when domination already fails."""
    p, q = kappa.numerator, kappa.denominator
    off_den = q << (n + 3)          # off-A target ratio kappa / 2**(n+3)
    freqs: list[ExpPair] = []
    s1 = s2 = 0
    for k in range(1, n + 1):
        f1 = base ** k
        if mode == "strong":
            f1 = max(f1, (1 << (k * k)) + 1)
        if f1 <= s1:
            return None
        if k in in_a:
            f2 = _round_half_up(p * f1, q)
        else:
            f2 = max(1 + s2, _round_half_up(p * f1, off_den))
        if f2 <= s2:
            return None
        freqs.append((f1, f2))
        s1 += f1
        s2 += f2
    return freqs


def schedule_and_verify(
    n: int,
    A: Sequence[int],
    kappa: Fraction,
    cfg: Optional[SchedulerConfig] = None,
    mode: str = "standard",
) -> tuple[FreqSchedule, ConditionReport]:
    """Generate a schedule and return it together with its (passing) report.

    Construction is search-with-certification: build with the current base,
    verify exactly, double the base on failure.  The returned schedule always
    passed the verifier; :class:`BaseOverflow` signals inconsistent inputs.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not (0 < kappa <= 1):
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    in_a = set(A)
    if not all(1 <= k <= n for k in in_a):
        raise ValueError("A must be a subset of {1..n}")
    cfg = cfg or SchedulerConfig()
    if n > cfg.enum_limit:
        raise EnumTooLarge(
            f"n={n} cannot be certified (enumeration limit {cfg.enum_limit})"
        )

    base = cfg.start_base(n)
    while base <= cfg.max_base:
        freqs = _generate(n, in_a, kappa, base, mode)
        if freqs is not None:
            sched = FreqSchedule(
                n=n,
                freqs=tuple(freqs),
                kappa=kappa,
                A=tuple(sorted(in_a)),
                base=base,
                mode=mode,
            )
            report = verify_conditions(sched, cfg.enum_limit)
            if report.passed:
                return sched, report
        base *= 2
    raise BaseOverflow(f"no passing schedule up to base {cfg.max_base}")


def schedule_frequencies(
    n: int,
    A: Sequence[int],
    kappa: Fraction,
    cfg: Optional[SchedulerConfig] = None,
    mode: str = "standard",
) -> FreqSchedule:
    """As :func:`schedule_and_verify`, returning only the schedule."""
    sched, _report = schedule_and_verify(n, A, kappa, cfg, mode)
    return sched


@dataclass(frozen=True)
class OrdinaryBounds:
    """Coefficient sums certifying ordinary-derivative bounds in strong mode.

    Over the combined F and G term sets (all nonempty subsets M):

    ``s_val`` = sum |b_M| / m1**2     bounds |F(z)| + |G(z)|
    ``s_d1``  = sum |b_M| / m1        bounds the first-variable derivatives
    ``s_d2``  = sum |b_M| * m2/m1**2  bounds the second-variable derivatives

    The strong-lacunarity growth makes each sum < 2.
    """

    s_val: float
    s_d1: float
    s_d2: float
    passed: bool


def strong_mode_bounds(sched: FreqSchedule, pair: RSPair,
                       limit: int = 20) -> OrdinaryBounds:
    """Certify the ordinary-derivative sums of a strong-mode schedule."""
    if sched.mode != "strong":
        raise ModeError("ordinary-derivative bounds need a strong-mode schedule")
    if not sched.strong_ok:
        raise ModeError("schedule does not satisfy (n_k)_1 > 2**(k**2)")
    entries = enumerate_signed_sums(sched, limit)
    a = pair.schedule.a

    abs_b: dict[int, float] = {0: 1.0}
    t_val: list[float] = []
    t_d1: list[float] = []
    t_d2: list[float] = []
    for entry in entries:
        b = abs_b[entry.mask & ~(1 << (entry.max_index - 1))] * a[entry.max_index - 1]
        abs_b[entry.mask] = b
        m1, m2 = entry.m
        m1sq = m1 * m1
        t_val.append(b * (1 / m1sq))
        t_d1.append(b * (1 / m1))
        t_d2.append(b * (m2 / m1sq))
    s_val = math.fsum(t_val)
    s_d1 = math.fsum(t_d1)
    s_d2 = math.fsum(t_d2)
    return OrdinaryBounds(
        s_val=s_val,
        s_d1=s_d1,
        s_d2=s_d2,
        passed=s_val < 2.0 and s_d1 < 2.0 and s_d2 < 2.0,
    )
