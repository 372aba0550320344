"""Closed-form length bounds and the side propositions on general systems."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from ._lasso import find_lasso
from .construct import OVERLAP_CONSTRUCTION, APWitness
from .core import Coding, GeneralSystem, Interval, SystemParams, cylinder, format_scalar, value
from .errors import DomainError
from .expansion import member

INFINITY = math.inf

THEOREM_MAIN = "TheoremMain"
ALPHA_BOUND = "AlphaBound"
NATURAL_AP = "NaturalAP"


def power_bound_tag(m: int) -> str:
    return f"PowerBound({m})"


@dataclass(frozen=True)
class LengthBounds:
    lower: int
    upper: float  # int, or math.inf when nothing applies
    sources: tuple = ()

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def exact(self) -> Optional[int]:
        return self.lower if self.lower == self.upper else None

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": "inf" if self.upper == INFINITY else int(self.upper),
            "exact": self.exact,
            "sources": list(self.sources),
        }


def upper_bound_alpha(p: SystemParams) -> int:
    """``floor(1/alpha) + 1``: a renormalised progression has gap at least alpha."""
    if p.alpha <= 0:
        raise DomainError("alpha must be positive")
    return math.floor(1 / p.alpha) + 1


def power_residual(n: int, m: int, x: Fraction) -> Fraction:
    """``n*x + (n-1)*x**m - 1``, increasing on (0, 1)."""
    return n * x + (n - 1) * x**m - 1


def lambda_nm(n: int, m: int, tol=Fraction(1, 10**12)) -> Interval:
    """Bracket the root in (0, 1) of ``n*x + (n-1)*x**m = 1`` to width ``tol``."""
    tol = Fraction(tol)
    if n < 2 or m < 1 or tol <= 0:
        raise DomainError("need n >= 2, m >= 1 and a positive tolerance")
    if m == 1:
        root = Fraction(1, 2 * n - 1)
        return Interval(root, root)
    lo, hi = Fraction(0), Fraction(1)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        f = power_residual(n, m, mid)
        if f == 0:
            return Interval(mid, mid)
        if f < 0:
            lo = mid
        else:
            hi = mid
    return Interval(lo, hi)


def upper_bound_power(p: SystemParams, m_max: int = 8):
    """Smallest ``n**m`` (m <= m_max) with ``lam`` strictly below the root ``lambda_{n,m}``.

    Decided by the exact sign of the residual at ``lam``; ``math.inf`` if no
    ``m`` qualifies.
    """
    if m_max < 1:
        raise DomainError("m_max must be positive")
    for m in range(1, m_max + 1):
        if power_residual(p.n, m, p.lam) < 0:
            return p.n**m
    return INFINITY


def _power_m(p: SystemParams, m_max: int) -> Optional[int]:
    for m in range(1, m_max + 1):
        if power_residual(p.n, m, p.lam) < 0:
            return m
    return None


def ap_length_bounds(p: SystemParams, m_max: int = 8) -> LengthBounds:
    """Lower/upper bounds on the longest progression in the attractor."""
    if m_max < 1:
        raise DomainError("m_max must be positive")
    if p.lam < p.threshold:
        sources = [THEOREM_MAIN]
        if _power_m(p, m_max) == 1:
            sources.append(power_bound_tag(1))
        return LengthBounds(p.n, p.n, tuple(sources))
    alpha_ub = upper_bound_alpha(p)
    power_ub = upper_bound_power(p, m_max)
    upper = min(alpha_ub, power_ub)
    sources = [THEOREM_MAIN]
    if alpha_ub == upper:
        sources.append(ALPHA_BOUND)
    if power_ub == upper:
        sources.append(power_bound_tag(_power_m(p, m_max)))
    return LengthBounds(2 * p.n, upper, tuple(sources))


@dataclass
class Certificate:
    """Outcome of a decision procedure.

    ``kind`` is one of EXISTS, NOT_EXISTS, UNKNOWN (searches), NOT_FOUND
    (overlap search), NO_AP and INAPPLICABLE (the separation test).
    """

    kind: str
    params: dict
    k: Optional[int] = None
    depth: Optional[int] = None
    witness: Optional[APWitness] = None
    checks: Optional[dict] = None
    stats: dict = field(default_factory=dict)

    @property
    def definite(self) -> bool:
        return self.kind not in ("UNKNOWN",)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": self.params}
        if self.k is not None:
            out["k"] = self.k
        if self.depth is not None:
            out["depth"] = self.depth
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.checks is not None:
            out["checks"] = self.checks
        if self.stats:
            out["stats"] = self.stats
        return out


def _system_params(g: GeneralSystem) -> dict:
    out = g.describe()
    out["b"] = [format_scalar(x) for x in g.b]
    return out


def overlap_ap(g: GeneralSystem, depth_cap: int = 64, state_budget: int = 20_000) -> Certificate:
    """Three-term progression from a touching pair of adjacent first-level images.

    Looks for ``u, v`` in the attractor with ``f_i(u) = f_{i+1}(v)``, i.e.
    ``u - v = (b_{i+1} - b_i)/lam``.  Digit pairs are explored over the exact
    normalised difference, which must stay within ``[-1, 1]``; a cycle yields
    eventually periodic codings of ``u`` and ``v``.  The witness is
    ``{f_i(v), f_i(u), f_{i+1}(u)}``.
    """
    lam = g.lam
    pairs = [(a, c) for a in range(g.n) for c in range(g.n)]

    def successors(s):
        out = []
        for a, c in pairs:
            nxt = (s - g.b[a] + g.b[c]) / lam
            if -1 <= nxt <= 1:
                out.append(((a, c), nxt))
        return out

    params = _system_params(g)
    worst_depth, undecided = 0, False
    for i in range(g.n - 1):
        s = (g.b[i + 1] - g.b[i]) / lam
        if not -1 <= s <= 1:
            continue
        found = find_lasso(s, successors, depth_cap, state_budget)
        if found.status == "yes":
            u = Coding(tuple(a for a, _ in found.prefix), tuple(a for a, _ in found.cycle))
            v = Coding(tuple(c for _, c in found.prefix), tuple(c for _, c in found.cycle))
            uv, vv = value(u, g), value(v, g)
            if uv - vv != s:
                raise AssertionError("overlap pair does not realise the required offset")
            terms = (g.f(i, vv), g.f(i, uv), g.f(i + 1, uv))
            codings = (
                Coding((i,) + v.preperiod, v.period),
                Coding((i,) + u.preperiod, u.period),
                Coding((i + 1,) + u.preperiod, u.period),
            )
            witness = APWitness(terms, codings, OVERLAP_CONSTRUCTION)
            return Certificate("EXISTS", params, 3, found.depth, witness,
                               stats={"pair": [i, i + 1]})
        if g.covers_hull:
            # The attractor is all of [0, 1]; any u - v = s inside it will do.
            u = max(s, Fraction(0))
            vv = u - s
            terms = (g.f(i, vv), g.f(i, u), g.f(i + 1, u))
            witness = APWitness(terms, None, OVERLAP_CONSTRUCTION)
            return Certificate("EXISTS", params, 3, found.depth, witness,
                               stats={"pair": [i, i + 1], "membership": "hull covered"})
        if found.status == "unknown":
            undecided = True
        worst_depth = max(worst_depth, found.depth)
    if undecided:
        return Certificate("UNKNOWN", params, 3, depth_cap)
    return Certificate("NOT_FOUND", params, 3, worst_depth)


def no_ap_test(g: GeneralSystem) -> Certificate:
    """Separation test certifying that the attractor holds no 3-term progression.

    Applies when no three translations are in progression and ``lam`` is
    below half of the smallest defect ``|2b_j - b_i - b_k|`` over index
    triples ``i <= j <= k`` that are not all equal (adjacent spacings cover
    the triples with a repeated index).
    """
    params = _system_params(g)
    b = g.b
    triples = list(combinations(range(g.n), 3))
    defects = [abs(2 * b[j] - b[i] - b[k]) for i, j, k in triples]
    if any(d == 0 for d in defects):
        return Certificate("INAPPLICABLE", params, 3, checks={"failing": "b-has-AP"})
    spacing = min(b[i + 1] - b[i] for i in range(g.n - 1))
    triple_min = min(defects) if defects else None
    margin = spacing if triple_min is None else min(triple_min, spacing)
    threshold = margin / 2
    checks = {
        "triple_min": format_scalar(triple_min) if triple_min is not None else None,
        "spacing_min": format_scalar(spacing),
        "threshold": format_scalar(threshold),
    }
    if g.lam < threshold:
        return Certificate("NO_AP", params, 3, checks=checks)
    checks["failing"] = "lambda-not-below-threshold"
    return Certificate("INAPPLICABLE", params, 3, checks=checks)


def _common_prefix(codings) -> tuple:
    # Two distinct eventually periodic sequences differ within
    # max(preperiod) + lcm(periods) positions.
    limit = max(len(c.preperiod) for c in codings) + math.lcm(
        *(max(len(c.period), 1) for c in codings)
    )
    prefix = []
    for t in range(1, limit + 1):
        digits = {c.digit(t) for c in codings}
        if len(digits) != 1:
            break
        prefix.append(digits.pop())
    return tuple(prefix)


def _drop(c: Coding, count: int) -> Coding:
    if count <= len(c.preperiod):
        return Coding(c.preperiod[count:], c.period)
    if not c.period:
        return Coding()
    shift = (count - len(c.preperiod)) % len(c.period)
    return Coding((), c.period[shift:] + c.period[:shift])


def renormalize_ap(w: APWitness, p: GeneralSystem, depth_cap: int = 256) -> APWitness:
    """Blow a progression up out of its smallest common cylinder.

    The result has the same length, lies in the attractor, and its terms no
    longer share a first digit, so its difference is at least the first-level
    gap.
    """
    if w.length < 2 or w.diff <= 0:
        raise DomainError("need at least two strictly increasing terms")
    codings = w.codings
    if codings is None:
        results = [member(x, p, depth_cap) for x in w.terms]
        if not all(r.coding is not None for r in results):
            raise DomainError("witness terms lack certified codings")
        codings = tuple(r.coding for r in results)
    if len(set(codings)) != len(codings):
        raise DomainError("distinct terms must have distinct codings")
    prefix = _common_prefix(codings)
    if not prefix:
        return APWitness(w.terms, codings, w.provenance)
    box = cylinder(prefix, p)
    terms = tuple((x - box.low) / box.width for x in w.terms)
    return APWitness(terms, tuple(_drop(c, len(prefix)) for c in codings), w.provenance)
