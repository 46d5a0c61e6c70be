"""Brute-force coarsest bisimulations by greatest-fixpoint pair deletion.

Deliberately naive: these functions exist to check the refinement engines
and must not share code with them.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .lts import TAU, Lts, Partition

DEFAULT_LIMIT = 2000


class OracleLimitExceeded(ValueError):
    pass


@dataclass
class StateRelation:
    """Symmetric relation on ``0 .. n-1`` as a boolean matrix."""

    matrix: list[list[bool]]

    @classmethod
    def total(cls, n: int) -> StateRelation:
        return cls([[True] * n for _ in range(n)])

    @classmethod
    def identity(cls, n: int) -> StateRelation:
        return cls([[s == t for t in range(n)] for s in range(n)])

    @classmethod
    def from_partition(cls, p: Partition) -> StateRelation:
        return cls([[p[s] == p[t] for t in range(len(p))] for s in range(len(p))])

    @property
    def size(self) -> int:
        return len(self.matrix)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        s, t = pair
        return self.matrix[s][t]

    def is_symmetric(self) -> bool:
        n = self.size
        return all(self.matrix[s][t] == self.matrix[t][s] for s in range(n) for t in range(n))

    def is_equivalence(self) -> bool:
        n, m = self.size, self.matrix
        if not all(m[s][s] for s in range(n)) or not self.is_symmetric():
            return False
        return all(
            m[s][u] for s in range(n) for t in range(n) if m[s][t] for u in range(n) if m[t][u]
        )

    def to_partition(self) -> Partition:
        if not self.is_equivalence():
            raise ValueError("relation is not an equivalence")
        block = [-1] * self.size
        count = 0
        for s in range(self.size):
            if block[s] < 0:
                for t in range(self.size):
                    if self.matrix[s][t]:
                        block[t] = count
                count += 1
        return Partition(block)


def _check_limit(lts: Lts, limit: int) -> None:
    if lts.state_count > limit:
        raise OracleLimitExceeded(f"{lts.state_count} states exceeds oracle limit {limit}")


def _moves(lts: Lts) -> list[list[tuple[str, int]]]:
    out: list[list[tuple[str, int]]] = [[] for _ in range(lts.state_count)]
    for s, a, t in lts.transitions:
        out[s].append((a, t))
    return out


def tau_closure(lts: Lts) -> list[list[int]]:
    """``closure[s]``: every state reachable from ``s`` by zero or more τ-steps."""
    tau = [[t for a, t in m if a == TAU] for m in _moves(lts)]
    closure = []
    for s in range(lts.state_count):
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for t in tau[u]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        closure.append(sorted(seen))
    return closure


def _strong_ok(moves, R, s, t, a, s1) -> bool:
    return any(b == a and R[s1][t1] for b, t1 in moves[t])


def _branching_ok(moves, closure, R, s, t, a, s1) -> bool:
    if a == TAU and R[s1][t]:
        return True
    for t1 in closure[t]:
        if R[s][t1]:
            for b, t2 in moves[t1]:
                if b == a and R[s1][t2]:
                    return True
    return False


def _gfp(lts: Lts, ok) -> StateRelation:
    n = lts.state_count
    moves = _moves(lts)
    R = [[True] * n for _ in range(n)]
    changed = True
    while changed:
        changed = False
        for s in range(n):
            for t in range(n):
                if R[s][t] and not all(ok(moves, R, s, t, a, s1) for a, s1 in moves[s]):
                    R[s][t] = R[t][s] = False
                    changed = True
    return StateRelation(R)


def coarsest_strong_bisimulation(lts: Lts, limit: int = DEFAULT_LIMIT) -> Partition:
    _check_limit(lts, limit)
    return _gfp(lts, _strong_ok).to_partition()


def coarsest_branching_bisimulation(lts: Lts, limit: int = DEFAULT_LIMIT) -> Partition:
    _check_limit(lts, limit)
    closure = tau_closure(lts)

    def ok(moves, R, s, t, a, s1):
        return _branching_ok(moves, closure, R, s, t, a, s1)

    return _gfp(lts, ok).to_partition()


def _first_violation(lts: Lts, r: StateRelation, ok):
    moves = _moves(lts)
    R = r.matrix
    for s in range(lts.state_count):
        for t in range(lts.state_count):
            if not R[s][t]:
                continue
            for a, s1 in moves[s]:
                if not ok(moves, R, s, t, a, s1):
                    return (s, t, (s, a, s1))
    return None


def is_strong_bisimulation(lts: Lts, r: StateRelation):
    """``(True, None)`` or ``(False, (s, t, transition))`` for the first failure."""
    v = _first_violation(lts, r, _strong_ok)
    return v is None, v


def is_branching_bisimulation(lts: Lts, r: StateRelation):
    """``(True, None)`` or ``(False, (s, t, transition))`` for the first failure."""
    closure = tau_closure(lts)
    v = _first_violation(
        lts, r, lambda moves, R, s, t, a, s1: _branching_ok(moves, closure, R, s, t, a, s1)
    )
    return v is None, v


def is_canonical(lts: Lts, s: int, limit: int = DEFAULT_LIMIT) -> bool:
    """No τ-step from ``s`` leads to a branching-bisimilar state."""
    p = coarsest_branching_bisimulation(lts, limit)
    return not any(a == TAU and p[t] == p[s] for a, t in lts.successors(s))
