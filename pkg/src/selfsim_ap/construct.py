"""Explicit 2n-term progressions and exact witness verification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import Coding, GeneralSystem, SystemParams, format_scalar, is_ap, value
from .errors import DomainError, InfeasibleError
from .expansion import (
    EXACT_ZERO,
    PERIODIC,
    TRUNCATED,
    SignedExpansion,
    k_beta,
    member,
    signed_expand,
    window,
)

THEOREM_CONSTRUCTION = "Theorem4Construction"
BOUNDARY_WITNESS = "BoundaryWitness"
SEARCH_FOUND = "SearchFound"
OVERLAP_CONSTRUCTION = "OverlapConstruction"
EXTERNAL = "External"


@dataclass(frozen=True)
class APWitness:
    """A claimed progression, optionally with one coding per term.

    ``terms`` is the claimed value list; nothing here asserts it is really a
    progression inside the attractor -- that is :func:`verify_witness`'s job.
    A construction cut off before its digit expansion closed up carries the
    exact leftover ``residual`` at index ``residual_index``; its terms are
    then the values of the truncated codings, not an exact progression.
    """

    terms: tuple
    codings: Optional[tuple] = None
    provenance: str = EXTERNAL
    residual: Optional[Fraction] = None
    residual_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(Fraction(x) for x in self.terms))
        if self.codings is not None:
            object.__setattr__(self, "codings", tuple(self.codings))
            if len(self.codings) != len(self.terms):
                raise DomainError("need exactly one coding per term")

    @classmethod
    def progression(cls, first, diff, length, codings=None, provenance=EXTERNAL):
        first, diff = Fraction(first), Fraction(diff)
        terms = tuple(first + i * diff for i in range(length))
        return cls(terms, codings, provenance)

    @property
    def first(self) -> Fraction:
        return self.terms[0]

    @property
    def diff(self) -> Fraction:
        return self.terms[1] - self.terms[0] if len(self.terms) > 1 else Fraction(0)

    @property
    def length(self) -> int:
        return len(self.terms)

    @property
    def exact(self) -> bool:
        return self.residual is None

    def to_json(self) -> dict:
        out = {
            "first": format_scalar(self.first),
            "diff": format_scalar(self.diff),
            "length": self.length,
            "codings": [c.to_json() for c in self.codings] if self.codings else [],
            "provenance": self.provenance,
        }
        if not self.exact:
            out["terms"] = [format_scalar(x) for x in self.terms]
            out["residual"] = format_scalar(self.residual)
            out["residual_index"] = self.residual_index
        return out


def _boundary_witness(p: SystemParams) -> APWitness:
    # At lam = 1/(2n-1) we have alpha = lam, so the left and right endpoints
    # of the first-level cylinders are exactly the multiples of lam.
    codings = []
    for j in range(2 * p.n):
        i, odd = divmod(j, 2)
        codings.append(Coding((i,), (p.n - 1,)) if odd else Coding((i,)))
    return APWitness.progression(0, p.lam, 2 * p.n, codings, BOUNDARY_WITNESS)


def _tail_digits(exp: SignedExpansion, odd: bool) -> tuple:
    """Per-position digits for odd- or even-indexed terms (1-based indexing)."""

    def assign(d):
        if d >= 0:
            return d if odd else 0
        return 0 if odd else -d

    pre = tuple(assign(d) for d in exp.digits)
    per = tuple(assign(d) for d in exp.period) if exp.tail == PERIODIC else ()
    return pre, per


def build_ap(p: SystemParams, max_digits: int = 64) -> APWitness:
    """The 2n-term progression for ``lam >= 1/(2n-1)``.

    Term ``2i-1`` has leading digits ``(i-1, 0)`` and term ``2i`` has
    ``(i-1, beta)``; later positions follow the signed expansion, each digit
    ``d_t`` going to the odd-indexed terms when non-negative and ``-d_t`` to
    the even-indexed terms otherwise.  At ``lam = 1/(2n-1)`` the explicit
    progression ``{j*lam}`` is returned instead.
    """
    if p.lam < p.threshold:
        raise InfeasibleError(
            f"lambda={p.lam} < 1/{2 * p.n - 1}: no {p.n + 1}-term progression exists"
        )
    if p.lam == p.threshold:
        return _boundary_witness(p)
    beta = k_beta(p.lam).beta
    if beta > p.n - 1:
        raise AssertionError(f"beta={beta} outside the digit alphabet")
    exp = signed_expand(p, max_digits)
    odd_pre, odd_per = _tail_digits(exp, odd=True)
    even_pre, even_per = _tail_digits(exp, odd=False)
    codings = []
    for i in range(p.n):
        codings.append(Coding((i, 0) + odd_pre, odd_per))
        codings.append(Coding((i, beta) + even_pre, even_per))
    for c in codings:
        c.check(p.n)
    terms = tuple(value(c, p) for c in codings)
    if exp.tail == TRUNCATED:
        return APWitness(terms, tuple(codings), THEOREM_CONSTRUCTION,
                         exp.remainder, exp.next_index)
    return APWitness(terms, tuple(codings), THEOREM_CONSTRUCTION)


def reflect(w: APWitness, system: GeneralSystem) -> APWitness:
    """Image of ``w`` under ``x -> 1 - x``; digits map ``a -> n-1-a``.

    Only valid for systems symmetric about 1/2 (every equi-spaced system is).
    """
    codings = None
    if w.codings is not None:
        flip = lambda word: tuple(system.n - 1 - a for a in word)
        codings = []
        for c in reversed(w.codings):
            # A zero tail reflects to an all-(n-1) tail.
            codings.append(Coding(flip(c.preperiod), flip(c.period) if c.period else (system.n - 1,)))
    return APWitness(tuple(1 - x for x in reversed(w.terms)), codings, w.provenance)


@dataclass
class VerificationReport:
    passed: bool
    checks: list = field(default_factory=list)
    membership: list = field(default_factory=list)

    def failures(self) -> list:
        return [c for c in self.checks if not c["ok"]]

    def to_json(self) -> list:
        return self.checks


def verify_witness(w: APWitness, system: GeneralSystem, depth_cap: int = 256) -> VerificationReport:
    """Exact re-check of a claimed progression; failures are report entries.

    PASS needs (a) the terms to form a progression with positive difference,
    (b) every term to get a YES from :func:`member`, and (c) every coding,
    when present, to evaluate to its term.
    """
    checks = []
    terms = list(w.terms)
    try:
        ap_ok = len(terms) >= 2 and is_ap(terms)
        detail = f"diff {format_scalar(w.diff)}" if ap_ok else "gaps differ"
    except DomainError as exc:
        ap_ok, detail = False, str(exc)
    checks.append({"check": "ap_identity", "ok": ap_ok, "detail": detail})

    coding_ok = True
    if w.codings is not None:
        for i, (x, c) in enumerate(zip(terms, w.codings)):
            try:
                ok = value(c, system) == x
                detail = f"term {i}: coding {c}"
            except DomainError as exc:
                ok, detail = False, f"term {i}: {exc}"
            coding_ok &= ok
            checks.append({"check": "coding_value", "ok": ok, "detail": detail})

    membership = [member(x, system, depth_cap) for x in terms]
    for i, (x, m) in enumerate(zip(terms, membership)):
        checks.append({
            "check": "membership",
            "ok": m.verdict == "YES",
            "detail": f"term {i} = {format_scalar(x)}: {m.verdict} at depth {m.depth}",
        })
    passed = ap_ok and coding_ok and all(m.verdict == "YES" for m in membership)

    if not w.exact and isinstance(system, SystemParams):
        # The leftover sits inside the feasibility window, so the greedy step
        # can be repeated forever: an exact progression exists even though
        # this finite record of it is not one.
        # Consecutive gaps differ by exactly (lam + alpha) * R / lam.
        gaps = [b - a for a, b in zip(terms, terms[1:])]
        defect = system.spacing * w.residual / system.lam
        consistent = len(gaps) >= 2 and all(
            gaps[j] - gaps[j + 1] == (defect if j % 2 == 0 else -defect)
            for j in range(len(gaps) - 1)
        )
        checks.append({
            "check": "residual_consistent",
            "ok": consistent,
            "detail": f"gap defect {format_scalar(defect)}",
        })
        inside = consistent and abs(w.residual) <= window(system, w.residual_index)
        checks.append({
            "check": "continuation_window",
            "ok": inside,
            "detail": f"|R_{w.residual_index}| <= 2(n-1)lam^t/(1-lam): {inside}",
        })
    return VerificationReport(passed, checks, membership)
