"""Exact parameter types, codings, cylinders and the progression predicate.

Every quantity is a :class:`fractions.Fraction`.  The attractor of a system
``{f_i(x) = lam*x + b_i}`` is normalised to have convex hull ``[0, 1]``, so a
coding ``a_1 a_2 ...`` denotes the point ``sum_t b[a_t] * lam**(t-1)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, NormalizationError, ParseError

Scalar = Fraction

_INT = r"[+-]?\d+(?:\^\d+)?"
_RATIO_RE = re.compile(rf"^\s*({_INT})\s*/\s*({_INT})\s*$")
_DECIMAL_RE = re.compile(r"^\s*([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?\s*$")


def _parse_int(text: str) -> int:
    if "^" in text:
        base, exp = text.split("^")
        return int(base) ** int(exp)
    return int(text)


def parse_scalar(text) -> Fraction:
    """Read ``"p/q"`` or a finite decimal literal as an exact rational.

    Integers and Fractions pass through.  ``p`` and ``q`` may be written as
    powers (``1/10^12``); decimals may carry an exponent (``1e-12``).
    Repeating-decimal notation such as ``"0.333..."`` is rejected.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"cannot read {text!r} as an exact rational")
    m = _RATIO_RE.match(text)
    if m:
        num, den = _parse_int(m.group(1)), _parse_int(m.group(2))
        if den <= 0:
            raise ParseError(f"denominator must be positive in {text!r}")
        return Fraction(num, den)
    m = _DECIMAL_RE.match(text)
    if m and (m.group(2) or m.group(3)):
        sign, whole, frac, exp = m.groups()
        frac = frac or ""
        value = Fraction(int((whole or "0") + frac), 10 ** len(frac))
        if exp:
            value *= Fraction(10) ** int(exp)
        return -value if sign == "-" else value
    raise ParseError(f"cannot read {text!r} as an exact rational")


def format_scalar(x: Fraction) -> str:
    """Canonical ``p/q`` rendering (integers included, e.g. ``1/1``)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class GeneralSystem:
    """Homogeneous IFS ``f_i(x) = lam*x + b_i`` with normalised translations.

    The constructor validates ``0 = b_1 < ... < b_n = 1 - lam`` and raises
    :class:`NormalizationError` otherwise; use :meth:`normalized` to rescale
    arbitrary translation vectors first.
    """

    n: int
    lam: Fraction
    b: tuple

    def __post_init__(self):
        lam = Fraction(self.lam)
        b = tuple(Fraction(x) for x in self.b)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "b", b)
        if self.n < 2:
            raise DomainError(f"need at least two maps, got n={self.n}")
        if not 0 < lam < 1:
            raise DomainError(f"ratio must lie in (0, 1), got {lam}")
        if len(b) != self.n:
            raise NormalizationError(f"expected {self.n} translations, got {len(b)}")
        if any(b[i] >= b[i + 1] for i in range(self.n - 1)):
            raise NormalizationError("translations must be strictly increasing")
        if b[0] != 0 or b[-1] != 1 - lam:
            raise NormalizationError(
                f"translations must run from 0 to 1 - lambda = {1 - lam}, got {b[0]}..{b[-1]}"
            )

    @classmethod
    def normalized(cls, lam, b: Sequence) -> "GeneralSystem":
        """Affinely rescale ``b`` so the attractor's hull becomes ``[0, 1]``.

        Progression lengths are unchanged by the rescaling.
        """
        lam = parse_scalar(lam)
        b = sorted(parse_scalar(x) for x in b)
        span = b[-1] - b[0]
        if span <= 0:
            raise NormalizationError("translations must not all coincide")
        return cls(len(b), lam, tuple((x - b[0]) * (1 - lam) / span for x in b))

    @property
    def min_gap(self) -> Fraction:
        """Smallest gap between adjacent first-level cylinders (negative on overlap)."""
        return min(self.b[i + 1] - self.b[i] for i in range(self.n - 1)) - self.lam

    @property
    def strong_separation(self) -> bool:
        return self.min_gap > 0

    @property
    def covers_hull(self) -> bool:
        """First-level images tile [0, 1] without gaps, so the attractor is [0, 1]."""
        return all(self.b[i + 1] - self.b[i] <= self.lam for i in range(self.n - 1))

    def f(self, i: int, x: Fraction) -> Fraction:
        return self.lam * x + self.b[i]

    def describe(self) -> dict:
        return {"n": self.n, "lambda": format_scalar(self.lam)}


@dataclass(frozen=True)
class SystemParams(GeneralSystem):
    """Equi-spaced system ``b_i = (i-1)(lam + alpha)``, ``alpha = (1 - n*lam)/(n-1)``.

    Build through :func:`make_system`, which enforces ``0 < lam < 1/n``.
    """

    alpha: Fraction = field(default=None)

    def __post_init__(self):
        super().__post_init__()
        alpha = (1 - self.n * self.lam) / (self.n - 1)
        if self.alpha is not None and Fraction(self.alpha) != alpha:
            raise DomainError("alpha inconsistent with n and lambda")
        object.__setattr__(self, "alpha", alpha)
        if any(self.b[i] != i * (self.lam + alpha) for i in range(self.n)):
            raise NormalizationError("translations are not equi-spaced")

    @property
    def threshold(self) -> Fraction:
        """The critical ratio 1/(2n-1)."""
        return Fraction(1, 2 * self.n - 1)

    @property
    def spacing(self) -> Fraction:
        """Distance ``lam + alpha`` between consecutive translations."""
        return self.lam + self.alpha


def make_system(n: int, lam) -> SystemParams:
    lam = parse_scalar(lam)
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if not 0 < lam < Fraction(1, n):
        raise DomainError(f"lambda must lie in (0, 1/{n}), got {lam}")
    alpha = (1 - n * lam) / (n - 1)
    b = tuple(i * (lam + alpha) for i in range(n))
    return SystemParams(n, lam, b, alpha)


def _primitive_root(word: tuple) -> tuple:
    size = len(word)
    for length in range(1, size + 1):
        if size % length == 0 and word[:length] * (size // length) == word:
            return word[:length]
    return word


@dataclass(frozen=True)
class Coding:
    """Eventually periodic digit address ``preperiod . period^inf``.

    An empty period stands for the all-zero tail.  Instances are always stored
    in canonical form (primitive period, shortest preperiod), so two codings of
    the same digit sequence compare equal.
    """

    preperiod: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        pre = tuple(int(d) for d in self.preperiod)
        per = tuple(int(d) for d in self.period)
        if any(d < 0 for d in pre + per):
            raise DomainError("digits must be non-negative")
        if per and not any(per):
            per = ()
        if per:
            per = _primitive_root(per)
            while pre and pre[-1] == per[-1]:
                per = per[-1:] + per[:-1]
                pre = pre[:-1]
        else:
            while pre and pre[-1] == 0:
                pre = pre[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def digit(self, t: int) -> int:
        """Digit at 1-based position ``t``."""
        if t <= len(self.preperiod):
            return self.preperiod[t - 1]
        if not self.period:
            return 0
        return self.period[(t - 1 - len(self.preperiod)) % len(self.period)]

    def prefix(self, length: int) -> tuple:
        return tuple(self.digit(t) for t in range(1, length + 1))

    def max_digit(self) -> int:
        return max(self.preperiod + self.period, default=0)

    def check(self, n: int) -> None:
        if self.max_digit() >= n:
            raise DomainError(f"coding uses digit {self.max_digit()} outside 0..{n - 1}")

    def to_json(self) -> dict:
        return {"preperiod": list(self.preperiod), "period": list(self.period)}

    @classmethod
    def from_json(cls, data: dict) -> "Coding":
        return cls(tuple(data.get("preperiod", ())), tuple(data.get("period", ())))

    def __str__(self):
        pre = "".join(map(str, self.preperiod))
        return f"{pre}({''.join(map(str, self.period))})" if self.period else pre or "0"


@dataclass(frozen=True)
class Interval:
    low: Fraction
    high: Fraction

    def __post_init__(self):
        if self.low > self.high:
            raise DomainError(f"empty interval [{self.low}, {self.high}]")

    @property
    def width(self) -> Fraction:
        return self.high - self.low

    def __contains__(self, x) -> bool:
        return self.low <= x <= self.high


def _weighted_sum(word: Iterable[int], system: GeneralSystem) -> tuple:
    total, scale = Fraction(0), Fraction(1)
    for a in word:
        total += system.b[a] * scale
        scale *= system.lam
    return total, scale


def value(c: Coding, system: GeneralSystem) -> Fraction:
    """Exact point addressed by ``c``: finite part plus closed-form periodic tail."""
    c.check(system.n)
    head, scale = _weighted_sum(c.preperiod, system)
    if not c.period:
        return head
    block, block_scale = _weighted_sum(c.period, system)
    return head + scale * block / (1 - block_scale)


def cylinder(word: Sequence[int], system: GeneralSystem) -> Interval:
    """Basic interval ``f_{w_1} o ... o f_{w_t}([0, 1])``."""
    if any(not 0 <= a < system.n for a in word):
        raise DomainError(f"word {tuple(word)} has digits outside 0..{system.n - 1}")
    low, scale = _weighted_sum(word, system)
    return Interval(low, low + scale)


def is_ap(points: Sequence[Fraction]) -> bool:
    """True iff consecutive gaps are exactly equal (vacuous below three points)."""
    if not points:
        raise DomainError("need at least one point")
    if any(points[i] >= points[i + 1] for i in range(len(points) - 1)):
        raise DomainError("points must be strictly increasing")
    if len(points) < 3:
        return True
    diff = points[1] - points[0]
    return all(points[i + 1] - points[i] == diff for i in range(1, len(points) - 1))
