"""τ-cycle elimination by collapsing strongly connected τ-components."""
from __future__ import annotations

from dataclasses import dataclass

from .lts import TAU, Lts


@dataclass(frozen=True)
class SccMap:
    """``representative[s]`` is the output state that original state ``s``
    was collapsed into."""

    representative: tuple[int, ...]
    component_count: int


def tau_sccs(lts: Lts) -> list[int]:
    """Component index per state for the τ-subgraph (iterative Tarjan).

    Components are numbered in the order Tarjan completes them.
    """
    n = lts.state_count
    tau_succ: list[list[int]] = [[] for _ in range(n)]
    for s, a, t in lts.transitions:
        if a == TAU:
            tau_succ[s].append(t)

    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0

    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            succs = tau_succ[v]
            while i < len(succs):
                w = succs[i]
                i += 1
                if index[w] < 0:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comp


def eliminate_tau_sccs(lts: Lts) -> tuple[Lts, SccMap]:
    """Collapse τ-SCCs; τ-steps inside a component are removed.

    Output states are numbered by ascending smallest member.
    """
    comp = tau_sccs(lts)
    smallest: dict[int, int] = {}
    for s in range(lts.state_count):
        smallest.setdefault(comp[s], s)
    renumber = {c: i for i, c in enumerate(sorted(smallest, key=smallest.__getitem__))}
    rep = tuple(renumber[comp[s]] for s in range(lts.state_count))
    edges = {
        (rep[s], a, rep[t])
        for s, a, t in lts.transitions
        if not (a == TAU and rep[s] == rep[t])
    }
    out = Lts(len(renumber), edges, rep[lts.initial])
    return out, SccMap(rep, len(renumber))
