"""Search for an eventually periodic infinite path in an implicit state graph.

Membership and the overlap search both reduce to the same question: starting
from an exact rational state, can the digit-shift map be iterated forever
without leaving the hull?  A cycle among exact states gives an eventually
periodic address; an exhausted frontier is a finite refutation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Sequence


@dataclass(frozen=True)
class LassoResult:
    status: str  # "yes" | "no" | "unknown"
    depth: int
    prefix: tuple = ()
    cycle: tuple = ()
    states: int = 0


def _live_states(graph: dict) -> set:
    """States of the explored graph from which an infinite path starts."""
    # Peel off states whose explored successors are all dead.
    out_degree = {}
    parents: dict = {}
    for state, edges in graph.items():
        targets = {nxt for _, nxt in edges if nxt in graph}
        out_degree[state] = len(targets)
        for nxt in targets:
            parents.setdefault(nxt, []).append(state)
    dead = [s for s, deg in out_degree.items() if deg == 0]
    live = set(graph)
    while dead:
        state = dead.pop()
        live.discard(state)
        for parent in parents.get(state, ()):
            out_degree[parent] -= 1
            if out_degree[parent] == 0:
                dead.append(parent)
    return live


def find_lasso(
    root: Hashable,
    successors: Callable[[Hashable], Sequence[tuple]],
    depth_cap: int,
    state_budget: int | None = None,
) -> LassoResult:
    """Breadth-first exploration with exact state deduplication.

    ``successors(state)`` returns ``(label, next_state)`` pairs in preference
    order.  Returns ``yes`` with the lexicographically greedy lasso through
    the explored live subgraph, ``no`` with the first depth at which no path
    survives, or ``unknown`` at the depth cap.
    """
    graph: dict = {}
    level = {root}
    for depth in range(depth_cap + 1):
        if not level:
            return LassoResult("no", depth, states=len(graph))
        revisit = False
        nxt_level = set()
        for state in level:
            if state not in graph:
                graph[state] = list(successors(state))
            for _, nxt in graph[state]:
                if nxt in graph:
                    revisit = True
                nxt_level.add(nxt)
        if revisit:
            live = _live_states(graph)
            if root in live:
                return _greedy_lasso(root, graph, live, depth, len(graph))
        if state_budget is not None and len(graph) > state_budget:
            return LassoResult("unknown", depth, states=len(graph))
        level = nxt_level
    return LassoResult("unknown", depth_cap, states=len(graph))


def _greedy_lasso(root, graph, live, depth, n_states) -> LassoResult:
    path_labels = []
    position = {}
    state = root
    while state not in position:
        position[state] = len(path_labels)
        label, state = next((lab, nxt) for lab, nxt in graph[state] if nxt in live)
        path_labels.append(label)
    start = position[state]
    return LassoResult(
        "yes", depth, tuple(path_labels[:start]), tuple(path_labels[start:]), n_states
    )
