"""Certified branch-and-bound over cylinder tuples, and the endpoint longest-AP probe.

A k-term progression ``a, a+d, ..., a+(k-1)d`` in the attractor picks one
depth-``l`` cylinder per term for every ``l``.  For a fixed choice of words the
admissible ``(a, d)`` form a polygon cut out by ``2k`` exact constraints;
eliminating ``a`` leaves an interval for ``d``.  Refining words can only shrink
the polygon, so an empty polygon prunes a whole subtree, and an empty frontier
is a finite refutation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .bounds import Certificate, _system_params
from .construct import SEARCH_FOUND, APWitness
from .core import Coding, GeneralSystem, cylinder
from .errors import BudgetError, DomainError
from .expansion import member

DEFAULT_MAX_DEPTH = 14
DEFAULT_NODE_BUDGET = 10**7
DEFAULT_ENDPOINT_CAP = 2 * 10**4


@dataclass(frozen=True)
class CylinderTuple:
    """Words of equal length, one per progression term, with their left endpoints."""

    words: tuple
    lows: tuple

    @property
    def depth(self) -> int:
        return len(self.words[0])


def _d_range(lows: Sequence[Fraction], width: Fraction, d_min: Fraction):
    """Interval of common differences left after eliminating the first term."""
    k = len(lows)
    d_lo, d_hi = d_min, None
    for j in range(k):
        for i in range(j + 1, k):
            # a + i*d in [lo_i, lo_i + w] and a + j*d in [lo_j, lo_j + w]
            gap = i - j
            lower = (lows[i] - lows[j] - width) / gap
            upper = (lows[i] - lows[j] + width) / gap
            if lower > d_lo:
                d_lo = lower
            if d_hi is None or upper < d_hi:
                d_hi = upper
    return d_lo, d_hi


def _vertex(lows, width, d_lo, d_hi) -> Optional[tuple]:
    """Lexicographically smallest feasible ``(a, d)`` with ``d > 0``."""
    if d_hi is None or d_lo > d_hi or d_hi <= 0:
        return None
    # The least admissible a, max_i(lo_i - i*d), does not increase with d.
    a_star = max(lo - i * d_hi for i, lo in enumerate(lows))
    d_star = max([d_lo] + [(lo - a_star) / i for i, lo in enumerate(lows) if i])
    if d_star <= 0:
        # a_star is attained all the way down to d -> 0+: no least d exists.
        d_star = d_hi
    return a_star, d_star


def ap_feasible(words: Sequence[Sequence[int]], system: GeneralSystem,
                d_min: Fraction = Fraction(0)) -> Optional[tuple]:
    """Rational ``(a, d)``, ``d > 0``, placing term ``i`` in ``cylinder(words[i])``, or None.

    The returned point is the region's lexicographically smallest vertex.
    """
    if len(words) < 2:
        raise DomainError("need at least two words")
    if len({len(w) for w in words}) != 1:
        raise DomainError("words must share one length")
    cyls = [cylinder(w, system) for w in words]
    width = cyls[0].width
    lows = [c.low for c in cyls]
    d_lo, d_hi = _d_range(lows, width, Fraction(d_min))
    return _vertex(lows, width, d_lo, d_hi)


def _monotone_children(words: tuple, n: int):
    """Digit extensions keeping the words in non-decreasing lexicographic order."""
    k = len(words)

    def rec(i, prev_digit):
        if i == k:
            yield ()
            return
        tied = i > 0 and words[i] == words[i - 1]
        start = prev_digit if tied else 0
        for c in range(start, n):
            for rest in rec(i + 1, c):
                yield (c,) + rest

    return rec(0, 0)


def _root_tuples(system: GeneralSystem, k: int, ordered: bool):
    digits = range(system.n)
    combos = (
        itertools.combinations_with_replacement(digits, k)
        if ordered
        else itertools.product(digits, repeat=k)
    )
    for combo in combos:
        if len(set(combo)) > 1:
            yield combo


def certified_search(
    system: GeneralSystem,
    k: int,
    max_depth: int = DEFAULT_MAX_DEPTH,
    node_budget: int = DEFAULT_NODE_BUDGET,
    member_depth: int = 64,
) -> Certificate:
    """Decide whether a ``k``-term progression exists, with an exact certificate.

    Only progressions not contained in a single first-level cylinder are
    enumerated (any progression can be blown up to one of those), so under
    strong separation the common difference is at least the first-level gap.
    Frontiers are explored breadth-first in lexicographic order; at every
    node the smallest vertex of its region is tested with :func:`member`.
    """
    if k < 3:
        raise DomainError("k must be at least 3")
    if max_depth < 1:
        raise DomainError("max_depth must be positive")
    params = _system_params(system)
    ordered = system.strong_separation
    d_min = max(system.min_gap, Fraction(0))
    lam = system.lam
    stats = {"nodes": 0, "frontier": []}
    cache: dict = {}

    def check(x):
        if x not in cache:
            cache[x] = member(x, system, member_depth)
        return cache[x]

    def evaluate(words, lows, width):
        stats["nodes"] += 1
        if stats["nodes"] > node_budget:
            raise BudgetError(f"node budget {node_budget} exhausted")
        d_lo, d_hi = _d_range(lows, width, d_min)
        return _vertex(lows, width, d_lo, d_hi)

    try:
        width = lam
        level = []
        for combo in _root_tuples(system, k, ordered):
            lows = tuple(system.b[c] for c in combo)
            point = evaluate(combo, lows, width)
            if point is not None:
                level.append((CylinderTuple(tuple((c,) for c in combo), lows), point))
        depth = 1
        while True:
            stats["frontier"].append(len(level))
            stats["max_depth"] = depth
            if not level:
                return Certificate("NOT_EXISTS", params, k, depth, stats=stats)
            for node, (a, d) in level:
                terms = [a + i * d for i in range(k)]
                results = []
                for x in terms:
                    r = check(x)
                    if r.verdict != "YES":
                        break
                    results.append(r)
                else:
                    codings = None
                    if all(r.coding is not None for r in results):
                        codings = tuple(r.coding for r in results)
                    witness = APWitness(tuple(terms), codings, SEARCH_FOUND)
                    stats["tuple"] = ["".join(map(str, w)) for w in node.words]
                    return Certificate("EXISTS", params, k, depth, witness, stats=stats)
            if depth >= max_depth:
                return Certificate("UNKNOWN", params, k, depth, stats=stats)
            child_width = width * lam
            nxt = []
            for node, _ in level:
                children = (
                    _monotone_children(node.words, system.n)
                    if ordered
                    else itertools.product(range(system.n), repeat=k)
                )
                for digits in children:
                    lows = tuple(lo + system.b[c] * width for lo, c in zip(node.lows, digits))
                    point = evaluate(digits, lows, child_width)
                    if point is not None:
                        words = tuple(w + (c,) for w, c in zip(node.words, digits))
                        nxt.append((CylinderTuple(words, lows), point))
            level, width, depth = nxt, child_width, depth + 1
    except BudgetError as exc:
        stats["error"] = f"BudgetError: {exc}"
        return Certificate("UNKNOWN", params, k, stats.get("max_depth", 0), stats=stats)


def _common_denominator(values) -> int:
    den = 1
    for v in values:
        den = math.lcm(den, v.denominator)
    return den


def endpoint_llap(system: GeneralSystem, m: int,
                  cap: int = DEFAULT_ENDPOINT_CAP) -> APWitness:
    """Longest progression among the left endpoints of all depth-``m`` cylinders.

    Every such endpoint has a terminating coding, so the result is a certified
    lower bound.  Ties go to the smallest first term, then the smallest
    difference.
    """
    if m < 1:
        raise DomainError("m must be positive")
    if system.n**m > cap:
        raise BudgetError(f"{system.n}^{m} points exceed the cap of {cap}")
    words: dict = {}
    for word in itertools.product(range(system.n), repeat=m):
        low = cylinder(word, system).low
        words.setdefault(low, word)
    points = sorted(words)
    den = _common_denominator(points)
    ints = [int(x * den) for x in points]
    dtype = np.int64 if ints[-1] < 2**61 else object
    A = np.array(ints, dtype=dtype)
    N = len(A)
    best_len, best = 1, (0, 0)
    if N >= 2:
        best_len, best = 2, (0, 1)
    for i in range(N - 1):
        tail = A[i + 1:]
        D = tail - A[i]
        prev = A[i] - D
        idx = np.searchsorted(A, prev)
        hit = (idx < N) & (A[np.minimum(idx, N - 1)] == prev)
        starts = np.nonzero(~hit)[0]
        if starts.size == 0:
            continue
        diffs = D[starts]
        lengths = np.full(starts.size, 2)
        nxt = tail[starts] + diffs
        alive = np.arange(starts.size)
        while alive.size:
            probe = nxt[alive]
            idx = np.searchsorted(A, probe)
            ok = (idx < N) & (A[np.minimum(idx, N - 1)] == probe)
            alive = alive[ok]
            lengths[alive] += 1
            nxt[alive] = nxt[alive] + diffs[alive]
        j = int(np.argmax(lengths))
        if lengths[j] > best_len:
            best_len, best = int(lengths[j]), (i, i + 1 + int(starts[j]))
    first = points[best[0]]
    diff = points[best[1]] - first if best_len > 1 else Fraction(0)
    terms = tuple(first + t * diff for t in range(best_len))
    codings = tuple(Coding(words[x]) for x in terms)
    return APWitness(terms, codings, SEARCH_FOUND)
