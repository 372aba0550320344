"""Membership decisions and the signed-digit expansion behind the 2n-term construction."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ._lasso import find_lasso
from .core import Coding, GeneralSystem, SystemParams, parse_scalar, value
from .errors import DomainError, InfeasibleError

EXACT_ZERO = "exact_zero"
PERIODIC = "periodic"
TRUNCATED = "truncated"


@dataclass(frozen=True)
class KBeta:
    k: int
    beta: int


def k_beta(lam) -> KBeta:
    """``k = floor(1/lam)`` and ``beta = ceil(k/2)``."""
    lam = parse_scalar(lam)
    if not 0 < lam < 1:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    k = math.floor(1 / lam)
    return KBeta(k, k // 2 if k % 2 == 0 else (k + 1) // 2)


def claim_target(p: SystemParams) -> Fraction:
    """The quantity ``2*beta*lam**2 - lam`` every constructed gap must absorb."""
    beta = k_beta(p.lam).beta
    return 2 * beta * p.lam**2 - p.lam


def window(p: SystemParams, t: int) -> Fraction:
    """Largest ``|sum_{s>=t} 2 d_s lam**s|`` reachable with ``|d_s| <= n-1``."""
    return 2 * (p.n - 1) * p.lam**t / (1 - p.lam)


def claim_feasible(p: SystemParams) -> bool:
    """Decide ``lam >= 1/(2n-1)``; when true, re-check the starting window exactly."""
    feasible = p.lam >= Fraction(1, 2 * p.n - 1)
    if feasible and abs(claim_target(p)) > window(p, 3):
        raise AssertionError(f"starting window violated at lambda={p.lam}")
    return feasible


@dataclass(frozen=True)
class SignedExpansion:
    """Digits ``d_3, d_4, ...`` with ``target = sum 2 d_t lam**t``.

    ``digits`` is the explicit prefix starting at ``t = 3``.  For a periodic
    tail, ``period`` repeats forever after it; for a truncated run,
    ``remainder`` is the exact ``R_{m+1}`` left after the last digit.
    """

    target: Fraction
    digits: tuple
    tail: str
    period: tuple = ()
    remainder: Fraction = Fraction(0)

    @property
    def next_index(self) -> int:
        return 3 + len(self.digits)

    def digit(self, t: int) -> Optional[int]:
        """``d_t`` for ``t >= 3``; None beyond a truncated prefix."""
        i = t - 3
        if i < len(self.digits):
            return self.digits[i]
        if self.tail == EXACT_ZERO:
            return 0
        if self.tail == PERIODIC:
            return self.period[(i - len(self.digits)) % len(self.period)]
        return None


def _pick_digit(r: Fraction, p: SystemParams) -> int:
    # r is R_t / lam**t; the next normalised remainder is (r - 2d)/lam.
    bound = Fraction(2 * (p.n - 1)) / (1 - p.lam)
    options = [
        d for d in range(-(p.n - 1), p.n) if abs(r - 2 * d) <= bound * p.lam
    ]
    if not options:
        raise AssertionError(f"no feasible digit for normalised remainder {r}")
    return min(options, key=lambda d: (abs(r - 2 * d), abs(d), d))


def signed_expand(p: SystemParams, max_digits: int = 64) -> SignedExpansion:
    """Greedy nearest-digit expansion with window lookahead.

    Stops with an exact zero remainder, on a repeated normalised remainder
    (periodic tail), or after ``max_digits`` digits.
    """
    if max_digits < 1:
        raise DomainError("max_digits must be positive")
    if not claim_feasible(p):
        raise InfeasibleError(f"lambda={p.lam} is below 1/{2 * p.n - 1}")
    target = claim_target(p)
    lam = p.lam
    r = target / lam**3
    seen = {}
    digits = []
    while len(digits) < max_digits:
        if r == 0:
            return SignedExpansion(target, tuple(digits), EXACT_ZERO)
        if r in seen:
            start = seen[r]
            return SignedExpansion(
                target, tuple(digits[:start]), PERIODIC, tuple(digits[start:])
            )
        seen[r] = len(digits)
        d = _pick_digit(r, p)
        digits.append(d)
        r = (r - 2 * d) / lam
    if r == 0:
        return SignedExpansion(target, tuple(digits), EXACT_ZERO)
    t_next = 3 + len(digits)
    return SignedExpansion(target, tuple(digits), TRUNCATED, remainder=r * lam**t_next)


@dataclass(frozen=True)
class MembershipResult:
    """``verdict`` is YES, NO or UNKNOWN.

    A YES normally carries an exact eventually periodic ``coding``.  On a
    system whose first-level images cover [0, 1] the attractor is the whole
    hull; a YES may then rest on that fact alone (``coding`` is None).
    """

    verdict: str
    depth: int
    coding: Optional[Coding] = None

    @property
    def is_member(self) -> bool:
        return self.verdict == "YES"


def _shift_successors(system: GeneralSystem):
    lam = system.lam

    def successors(z):
        out = []
        for a, shift in enumerate(system.b):
            nxt = (z - shift) / lam
            if 0 <= nxt <= 1:
                out.append((a, nxt))
        return out

    return successors


def member(x, system: GeneralSystem, depth_cap: int = 256,
           state_budget: Optional[int] = 100_000) -> MembershipResult:
    """Decide ``x`` in the attractor by exact cylinder pruning.

    YES carries an eventually periodic coding whose value is exactly ``x``;
    NO(d) means ``x`` lies in no depth-``d`` cylinder.  Rationals whose only
    addresses are aperiodic end in UNKNOWN at the depth cap.
    """
    if depth_cap < 1:
        raise DomainError("depth_cap must be positive")
    x = parse_scalar(x)
    if not 0 <= x <= 1:
        return MembershipResult("NO", 0)
    found = find_lasso(x, _shift_successors(system), depth_cap, state_budget)
    if found.status == "yes":
        coding = Coding(found.prefix, found.cycle)
        if value(coding, system) != x:
            raise AssertionError(f"membership coding {coding} does not evaluate to {x}")
        return MembershipResult("YES", found.depth, coding)
    if found.status == "no":
        return MembershipResult("NO", found.depth)
    if system.covers_hull:
        return MembershipResult("YES", found.depth)
    return MembershipResult("UNKNOWN", found.depth)
