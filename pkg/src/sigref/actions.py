"""Well-founded action partitions and the evaluation orders they induce."""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from typing import Iterable

from .lts import TAU, Lts, normalize_label


class ActionClass(enum.Enum):
    QUESTION = 0
    GREATER = 1


class NotWellFounded(ValueError):
    """The A_> subgraph of an LTS has a cycle."""

    def __init__(self, witness: list[int]):
        self.witness = witness
        super().__init__("cycle over terminating actions: " + " ".join(map(str, witness)))


@dataclass(frozen=True)
class ActionPartition:
    """Split of the alphabet into old-partition actions (``a_question``) and
    terminating actions (``a_greater``), whose targets are read from the
    partition under construction."""

    a_question: frozenset[str]
    a_greater: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "a_question", frozenset(map(normalize_label, self.a_question)))
        object.__setattr__(self, "a_greater", frozenset(map(normalize_label, self.a_greater)))
        overlap = self.a_question & self.a_greater
        if overlap:
            raise ValueError(f"actions in both classes: {sorted(overlap)}")

    @classmethod
    def with_greater(cls, alphabet: Iterable[str], greater: Iterable[str]) -> ActionPartition:
        greater = frozenset(map(normalize_label, greater))
        alphabet = frozenset(map(normalize_label, alphabet))
        return cls(alphabet - greater, greater)

    @classmethod
    def branching_default(cls, alphabet: Iterable[str]) -> ActionPartition:
        return cls.with_greater(alphabet, [TAU])

    @property
    def alphabet(self) -> frozenset[str]:
        return self.a_question | self.a_greater

    def classify(self, action: str) -> ActionClass:
        action = normalize_label(action)
        if action in self.a_greater:
            return ActionClass.GREATER
        if action in self.a_question:
            return ActionClass.QUESTION
        raise KeyError(f"action {action!r} not covered by the partition")

    def is_greater(self, action: str) -> bool:
        return self.classify(action) is ActionClass.GREATER

    def covers(self, lts: Lts) -> bool:
        return lts.alphabet <= self.alphabet


def _greater_successors(lts: Lts, ap: ActionPartition) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(lts.state_count)]
    for s, a, t in lts.transitions:
        if ap.is_greater(a):
            out[s].append(t)
    return out


def find_cycle(lts: Lts, ap: ActionPartition) -> list[int] | None:
    """Return a cycle ``[s0, ..., s0]`` over A_> transitions, or None.

    Iterative three-colour DFS; the witness is read off the explicit stack.
    """
    succ = _greater_successors(lts, ap)
    colour = [0] * lts.state_count  # 0 white, 1 on stack, 2 done
    for root in range(lts.state_count):
        if colour[root]:
            continue
        path = [root]
        iters = [iter(succ[root])]
        colour[root] = 1
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                colour[path.pop()] = 2
                iters.pop()
            elif colour[nxt] == 1:
                start = path.index(nxt)
                return path[start:] + [nxt]
            elif colour[nxt] == 0:
                colour[nxt] = 1
                path.append(nxt)
                iters.append(iter(succ[nxt]))
    return None


def check_wellfounded(lts: Lts, ap: ActionPartition) -> list[int] | None:
    """None if ``ap`` is well-founded for ``lts``, otherwise a cycle witness."""
    missing = lts.alphabet - ap.alphabet
    if missing:
        raise KeyError(f"actions not covered by the partition: {sorted(missing)}")
    return find_cycle(lts, ap)


def reverse_topological_order(lts: Lts, ap: ActionPartition) -> list[int]:
    """States ordered so that every A_> successor comes before its source.

    Kahn's algorithm on the reversed A_> graph with a min-heap, so ties go
    to the smallest state index.
    """
    succ = _greater_successors(lts, ap)
    pending = [len(set(ts)) for ts in succ]
    preds: list[list[int]] = [[] for _ in range(lts.state_count)]
    for s, ts in enumerate(succ):
        for t in set(ts):
            preds[t].append(s)
    heap = [s for s in range(lts.state_count) if pending[s] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        t = heapq.heappop(heap)
        order.append(t)
        for s in preds[t]:
            pending[s] -= 1
            if pending[s] == 0:
                heapq.heappush(heap, s)
    if len(order) != lts.state_count:
        raise NotWellFounded(find_cycle(lts, ap) or [])
    return order
