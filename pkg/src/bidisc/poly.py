"""Sparse bivariate analytic polynomials with arbitrary-precision exponents.

A polynomial is a finite map from exponent pairs ``(m1, m2)`` (Python ints,
so any size) to complex coefficients (a pair of 64-bit floats).  The terms
live on the closed unit bi-disc; all evaluation happens on the distinguished
boundary ``|z1| = |z2| = 1``, where the phase ``z1^m1 z2^m2`` at a rational
grid point reduces to an exact root of unity: the huge exponents never touch
floating point, only the final complex summation rounds.

Euler derivatives ``z d/dz`` act termwise by integer multipliers, so they are
represented as per-term rational weights rather than symbolic calculus.  For
polynomials defined by *inverting* the squared Euler derivative (coefficients
divided by ``m1**2``), :class:`PolyView` applies the composed rational weight
lazily, which avoids underflow when ``m1`` has hundreds of digits.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Union

from .errors import AntiDerivativeError, DominationError

# Exponent pair: (m1, m2), arbitrary-precision nonnegative integers.
ExpPair = tuple[int, int]


@dataclass(frozen=True)
class GridPoint:
    """The torus point ``(exp(2*pi*i*j1/N), exp(2*pi*i*j2/N))``."""

    N: int
    j1: int
    j2: int

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"grid order must be positive, got {self.N}")
        if not (0 <= self.j1 < self.N and 0 <= self.j2 < self.N):
            raise ValueError(f"grid indices ({self.j1}, {self.j2}) out of [0, {self.N})")

    def conj(self) -> "GridPoint":
        """The complex-conjugate point (indices negated mod N)."""
        return GridPoint(self.N, (-self.j1) % self.N, (-self.j2) % self.N)


class SparsePoly:
    """Immutable sparse polynomial; zero coefficients are never stored.

    Terms iterate in canonical order: lexicographic on ``(m1, m2)``.  That
    order fixes the summation order of every evaluation and the layout of
    serialized certificates, so results are reproducible bit for bit.
    """

    __slots__ = ("_terms", "_order", "analytic")

    def __init__(
        self,
        terms: Union[Mapping[ExpPair, complex], Iterable[tuple[ExpPair, complex]]] = (),
        analytic: bool = True,
    ) -> None:
        data: dict[ExpPair, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for e, c in items:
            m1, m2 = e
            c = complex(c)
            if c == 0:
                continue  # exact-zero pruning only, never an epsilon
            if analytic and (m1 < 0 or m2 < 0):
                raise ValueError(f"negative exponent {e} in analytic polynomial")
            key = (int(m1), int(m2))
            if key in data:
                raise ValueError(f"duplicate exponent {key}")
            data[key] = c
        self._terms = data
        self._order = tuple(sorted(data))
        self.analytic = analytic

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls) -> "SparsePoly":
        return cls()

    @classmethod
    def constant(cls, c: complex) -> "SparsePoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, e: ExpPair, c: complex = 1.0) -> "SparsePoly":
        return cls({e: c})

    # -- mapping-ish protocol --------------------------------------------------

    @property
    def term_count(self) -> int:
        return len(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, e: ExpPair) -> bool:
        return e in self._terms

    def __getitem__(self, e: ExpPair) -> complex:
        return self._terms[e]

    def get(self, e: ExpPair, default: complex = 0.0) -> complex:
        return self._terms.get(e, default)

    def exponents(self) -> tuple[ExpPair, ...]:
        return self._order

    def iter_terms(self) -> Iterator[tuple[ExpPair, complex]]:
        """Yield (exponent, coefficient) in canonical lexicographic order."""
        terms = self._terms
        for e in self._order:
            yield e, terms[e]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._order, tuple(self._terms[e] for e in self._order)))

    def __repr__(self) -> str:
        if self.term_count > 6:
            return f"SparsePoly(<{self.term_count} terms>)"
        body = ", ".join(f"{e}: {c!r}" for e, c in self.iter_terms())
        return f"SparsePoly({{{body}}})"


TermSource = Union[SparsePoly, "PolyView"]


def linear_combine(alpha: complex, p: SparsePoly, beta: complex, q: SparsePoly) -> SparsePoly:
    """Return ``alpha*p + beta*q`` with exact-zero results pruned."""
    out: dict[ExpPair, complex] = {}
    if alpha != 0:
        for e, c in p.iter_terms():
            out[e] = alpha * c
    if beta != 0:
        for e, c in q.iter_terms():
            out[e] = out.get(e, 0.0) + beta * c
    return SparsePoly(out, analytic=p.analytic and q.analytic)


def reflect_shift(p: SparsePoly, s: ExpPair) -> SparsePoly:
    """Return ``z**s * p(1/z)``: the term ``c*z**e`` maps to ``c*z**(s-e)``.

    Doing the reflection and the shift in one step keeps the result analytic;
    ``s`` must dominate every exponent of ``p`` in both coordinates.
    """
    s1, s2 = s
    out: dict[ExpPair, complex] = {}
    for (m1, m2), c in p.iter_terms():
        if m1 > s1 or m2 > s2:
            raise DominationError(f"shift {s} does not dominate exponent {(m1, m2)}")
        out[(s1 - m1, s2 - m2)] = c
    return SparsePoly(out, analytic=True)


class EulerOp(enum.Enum):
    """Termwise Euler-derivative multipliers in the exponents ``(m1, m2)``."""

    IDENTITY = "identity"
    D1 = "d1"          # z1 d/dz1            -> m1
    D2 = "d2"          # z2 d/dz2            -> m2
    D1SQ = "d1sq"      # (z1 d/dz1)**2       -> m1**2
    D2SQ = "d2sq"      # (z2 d/dz2)**2       -> m2**2
    D1D2 = "d1d2"      # z2 d/dz2 z1 d/dz1   -> m1*m2
    ANTI_D1SQ = "anti_d1sq"  # inverse of D1SQ -> 1/m1**2, needs m1 >= 1

    def exponent_factor(self, e: ExpPair) -> Fraction:
        """Exact rational multiplier of this operator on the monomial ``z**e``."""
        m1, m2 = e
        if self is EulerOp.IDENTITY:
            return Fraction(1)
        if self is EulerOp.D1:
            return Fraction(m1)
        if self is EulerOp.D2:
            return Fraction(m2)
        if self is EulerOp.D1SQ:
            return Fraction(m1 * m1)
        if self is EulerOp.D2SQ:
            return Fraction(m2 * m2)
        if self is EulerOp.D1D2:
            return Fraction(m1 * m2)
        if m1 == 0:
            raise AntiDerivativeError("inverse Euler operator met exponent with m1 = 0")
        return Fraction(1, m1 * m1)

    def _float_weight(self, e: ExpPair) -> float:
        # Correctly-rounded float of the exact factor.  int/int true division
        # in CPython rounds correctly for operands of any size; plain float()
        # of a huge product raises OverflowError, which is the right outcome
        # for a materialized derivative that cannot be represented.
        m1, m2 = e
        if self is EulerOp.IDENTITY:
            return 1.0
        if self is EulerOp.D1:
            return float(m1)
        if self is EulerOp.D2:
            return float(m2)
        if self is EulerOp.D1SQ:
            return float(m1 * m1)
        if self is EulerOp.D2SQ:
            return float(m2 * m2)
        if self is EulerOp.D1D2:
            return float(m1 * m2)
        if m1 == 0:
            raise AntiDerivativeError("inverse Euler operator met exponent with m1 = 0")
        return 1 / (m1 * m1)


class PolyView:
    """Lazy per-term reweighting of a source polynomial.

    Exponents are unchanged; each coefficient is multiplied by an exact
    rational weight converted once (correctly rounded) to a float.  Views are
    how derivative combinations of huge-degree polynomials are consumed
    without materializing coefficients like ``1/m1**2`` with ``m1 ~ 10**200``.
    """

    __slots__ = ("source", "_weight", "analytic")

    def __init__(self, source: SparsePoly, weight: Callable[[int, int], float]) -> None:
        self.source = source
        self._weight = weight
        self.analytic = source.analytic

    @property
    def term_count(self) -> int:
        return self.source.term_count

    def iter_terms(self) -> Iterator[tuple[ExpPair, complex]]:
        weight = self._weight
        for (m1, m2), c in self.source.iter_terms():
            w = weight(m1, m2)
            if w != 0.0:
                yield (m1, m2), w * c


def euler_view(p: SparsePoly, op: EulerOp) -> TermSource:
    """View of ``op`` applied to ``p`` (no materialization)."""
    if op is EulerOp.IDENTITY:
        return p
    return PolyView(p, lambda m1, m2, _op=op: _op._float_weight((m1, m2)))


# Weights of Euler operators applied to the polynomial F defined by
# (z1 d/dz1)**2 F = source.  Every weight is an int/int true division
# (correctly rounded at any operand size); magnitudes stay around
# max(1, m2/m1), so nothing overflows however large the exponents get.
_ANTIDERIVED_WEIGHTS: dict[EulerOp, Callable[[int, int], float]] = {
    EulerOp.IDENTITY: lambda m1, m2: 1 / (m1 * m1),
    EulerOp.D1: lambda m1, m2: 1 / m1,
    EulerOp.D2: lambda m1, m2: m2 / (m1 * m1),
    EulerOp.D1SQ: lambda m1, m2: 1.0,
    EulerOp.D2SQ: lambda m1, m2: (m2 * m2) / (m1 * m1),
    EulerOp.D1D2: lambda m1, m2: m2 / m1,
}


def antiderivative_view(source: SparsePoly, op: EulerOp) -> TermSource:
    """View of ``op`` applied to the polynomial whose squared first-variable
    Euler derivative equals ``source``.

    Every exponent of ``source`` must have ``m1 >= 1``.
    """
    if op is EulerOp.ANTI_D1SQ:
        raise ValueError("compose with EulerOp.IDENTITY instead")
    if op is EulerOp.D1SQ:
        return source
    for (m1, _), _c in source.iter_terms():
        if m1 == 0:
            raise AntiDerivativeError("source has a term with m1 = 0")
        break  # canonical order puts the smallest m1 first
    return PolyView(source, _ANTIDERIVED_WEIGHTS[op])


def euler_apply(p: SparsePoly, op: EulerOp) -> SparsePoly:
    """Materialize ``op`` applied to ``p``; zero-factor terms are pruned."""
    if op is EulerOp.ANTI_D1SQ:
        for (m1, _), _c in p.iter_terms():
            if m1 == 0:
                raise AntiDerivativeError("inverse Euler operator met exponent with m1 = 0")
            break  # canonical order: the smallest m1 comes first
    return SparsePoly(dict(euler_view(p, op).iter_terms()), analytic=p.analytic)


@lru_cache(maxsize=16)
def _unit_roots(n: int) -> tuple[complex, ...]:
    # exp(2*pi*i*t/n) for t in [0, n); each entry from library trig directly,
    # not by repeated multiplication, to keep per-entry error at ~1 ulp.
    tau = 2.0 * math.pi
    return tuple(cmath.exp(1j * (tau * t / n)) for t in range(n))


def eval_at_grid_point(p: TermSource, g: GridPoint) -> complex:
    """Evaluate at ``(e^{2 pi i j1/N}, e^{2 pi i j2/N})`` with exact phases.

    The phase index ``(m1*j1 + m2*j2) mod N`` is reduced in integer
    arithmetic, so only the final complex summation rounds; that summation is
    exactly rounded (``math.fsum`` per component), hence independent of term
    order.
    """
    roots = _unit_roots(g.N)
    n, j1, j2 = g.N, g.j1, g.j2
    re: list[float] = []
    im: list[float] = []
    for (m1, m2), c in p.iter_terms():
        w = roots[(m1 * j1 + m2 * j2) % n]
        z = c * w
        re.append(z.real)
        im.append(z.imag)
    return complex(math.fsum(re), math.fsum(im))


def value_at_one(p: TermSource) -> complex:
    """Exact-phase value at ``z = (1, 1)``: the coefficient sum, exactly rounded."""
    re: list[float] = []
    im: list[float] = []
    for _e, c in p.iter_terms():
        re.append(c.real)
        im.append(c.imag)
    return complex(math.fsum(re), math.fsum(im))


def coeff_l1(p: TermSource, op: EulerOp = EulerOp.IDENTITY) -> float:
    """Weighted coefficient l1 sum: a certified upper bound for the sup of
    ``op`` applied to ``p`` over the bi-torus."""
    if isinstance(p, PolyView):
        if op is not EulerOp.IDENTITY:
            raise ValueError("apply operators to the underlying polynomial, not to a view")
        src: TermSource = p
    else:
        src = euler_view(p, op)
    return math.fsum(abs(c) for _e, c in src.iter_terms())
