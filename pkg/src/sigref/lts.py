"""Labeled transition systems, partitions, AUT text I/O and quotients."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

TAU = "tau"
TAU_ALIASES = frozenset({"tau", "i"})

Transition = tuple[int, str, int]


class LtsError(ValueError):
    """Raised for malformed LTS data or AUT documents."""


def normalize_label(label: str) -> str:
    if label in TAU_ALIASES:
        return TAU
    return label


def _check_label(label: str) -> None:
    if not label:
        raise LtsError("empty action label")
    if "\n" in label or "\r" in label:
        raise LtsError(f"action label contains a newline: {label!r}")


@dataclass(frozen=True)
class Lts:
    """An LTS over states ``0 .. state_count - 1``.

    Transitions are stored deduplicated and sorted by ``(src, label, dst)``.
    Successor and predecessor lists hold indices into :attr:`transitions`,
    so a transition doubles as the edge identifier used by the distributed
    engine.
    """

    state_count: int
    transitions: tuple[Transition, ...]
    initial: int = 0
    succ: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())
    pred: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())

    def __init__(self, state_count: int, transitions: Iterable[Sequence], initial: int = 0):
        if state_count <= 0:
            raise LtsError("an LTS needs at least one state")
        if not 0 <= initial < state_count:
            raise LtsError(f"initial state {initial} out of range for {state_count} states")
        edges = set()
        for src, label, dst in transitions:
            label = normalize_label(str(label))
            _check_label(label)
            if not (0 <= src < state_count and 0 <= dst < state_count):
                raise LtsError(f"transition ({src}, {label}, {dst}) out of range")
            edges.add((int(src), label, int(dst)))
        ordered = tuple(sorted(edges))
        succ: list[list[int]] = [[] for _ in range(state_count)]
        pred: list[list[int]] = [[] for _ in range(state_count)]
        for e, (src, _, dst) in enumerate(ordered):
            succ[src].append(e)
            pred[dst].append(e)
        object.__setattr__(self, "state_count", state_count)
        object.__setattr__(self, "transitions", ordered)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "succ", tuple(map(tuple, succ)))
        object.__setattr__(self, "pred", tuple(map(tuple, pred)))

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(label for _, label, _ in self.transitions)

    def out_degree(self, s: int) -> int:
        return len(self.succ[s])

    def successors(self, s: int) -> list[tuple[str, int]]:
        return [(self.transitions[e][1], self.transitions[e][2]) for e in self.succ[s]]

    def relabel(self, mapping: dict[str, str]) -> Lts:
        return Lts(
            self.state_count,
            ((s, mapping.get(a, a), t) for s, a, t in self.transitions),
            self.initial,
        )


@dataclass(frozen=True)
class Partition:
    """Block ID per state. Compare with :meth:`same_relation`, not ``==``."""

    block_of: tuple[int, ...]

    def __init__(self, block_of: Iterable[int]):
        blocks = tuple(int(b) for b in block_of)
        if any(b < 0 for b in blocks):
            raise LtsError("block IDs must be non-negative")
        object.__setattr__(self, "block_of", blocks)

    @classmethod
    def trivial(cls, n: int) -> Partition:
        return cls([0] * n)

    @classmethod
    def discrete(cls, n: int) -> Partition:
        return cls(range(n))

    def __len__(self) -> int:
        return len(self.block_of)

    def __getitem__(self, s: int) -> int:
        return self.block_of[s]

    @property
    def block_count(self) -> int:
        return len(set(self.block_of))

    def canonical(self) -> Partition:
        """Renumber blocks 0, 1, ... in order of first occurrence."""
        ids: dict[int, int] = {}
        return Partition(ids.setdefault(b, len(ids)) for b in self.block_of)

    def blocks(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for s, b in enumerate(self.block_of):
            groups.setdefault(b, []).append(s)
        return list(groups.values())

    def same_relation(self, other: Partition) -> bool:
        return len(self) == len(other) and self.canonical().block_of == other.canonical().block_of

    def distinguishing_pair(self, other: Partition) -> tuple[int, int] | None:
        """Return a state pair related by exactly one of the two partitions."""
        if len(self) != len(other):
            raise LtsError("partitions cover different state counts")
        first_self: dict[int, int] = {}
        first_other: dict[int, int] = {}
        for s in range(len(self)):
            a = first_self.setdefault(self[s], s)
            b = first_other.setdefault(other[s], s)
            if a != b:
                # s shares a block with min(a, b) in one partition only
                return (min(a, b), s)
        return None

    def refines(self, coarser: Partition) -> bool:
        """True iff every block of ``self`` lies inside a block of ``coarser``."""
        image: dict[int, int] = {}
        for s, b in enumerate(self.block_of):
            if image.setdefault(b, coarser[s]) != coarser[s]:
                return False
        return True


# --- AUT format -------------------------------------------------------------

_HEADER = re.compile(r"^\s*des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_QUOTED = re.compile(r'^\s*\(\s*(\d+)\s*,\s*"((?:[^"\\]|\\.)*)"\s*,\s*(\d+)\s*\)\s*$')
_BARE = re.compile(r"^\s*\(\s*(\d+)\s*,\s*([^,\"]+?)\s*,\s*(\d+)\s*\)\s*$")


def parse_aut(text: str) -> Lts:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise LtsError("empty AUT document")
    m = _HEADER.match(lines[0])
    if m is None:
        raise LtsError(f"malformed AUT header: {lines[0]!r}")
    initial, count, n = map(int, m.groups())
    if n == 0:
        raise LtsError("AUT document declares zero states")
    if initial >= n:
        raise LtsError(f"initial state {initial} >= state count {n}")
    body = lines[1:]
    if len(body) != count:
        raise LtsError(f"header declares {count} transitions, found {len(body)}")
    transitions = []
    for lineno, line in enumerate(body, start=2):
        m = _QUOTED.match(line) or _BARE.match(line)
        if m is None:
            raise LtsError(f"line {lineno}: malformed transition {line!r}")
        src, label, dst = int(m.group(1)), m.group(2), int(m.group(3))
        if src >= n or dst >= n:
            raise LtsError(f"line {lineno}: state index out of range")
        transitions.append((src, label, dst))
    return Lts(n, transitions, initial)


def write_aut(lts: Lts) -> str:
    out = [f"des ({lts.initial}, {len(lts.transitions)}, {lts.state_count})"]
    out.extend(f'({s},"{a}",{t})' for s, a, t in lts.transitions)
    return "\n".join(out) + "\n"


def read_aut(path) -> Lts:
    with open(path, encoding="utf-8") as fh:
        return parse_aut(fh.read())


def save_aut(lts: Lts, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_aut(lts))


# --- partition sidecar ------------------------------------------------------

def write_partition(p: Partition) -> str:
    return "".join(f"{s} {b}\n" for s, b in enumerate(p.block_of))


def parse_partition(text: str) -> Partition:
    entries: dict[int, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise LtsError(f"line {lineno}: expected 'state block', got {line!r}")
        s, b = int(parts[0]), int(parts[1])
        if s in entries:
            raise LtsError(f"line {lineno}: duplicate state {s}")
        entries[s] = b
    if sorted(entries) != list(range(len(entries))):
        raise LtsError("partition file does not cover states 0..N-1")
    return Partition(entries[s] for s in range(len(entries)))


# --- quotient ---------------------------------------------------------------

STRONG = "strong"
BRANCHING = "branching"


def quotient(lts: Lts, p: Partition, semantics: str = BRANCHING) -> Lts:
    """Collapse every block of ``p`` to a single state.

    Blocks are numbered in order of first occurrence. Under branching
    semantics τ-steps inside a block are dropped; under strong semantics
    they become τ self-loops.
    """
    if semantics not in (STRONG, BRANCHING):
        raise LtsError(f"unknown semantics {semantics!r}")
    if len(p) != lts.state_count:
        raise LtsError(f"partition covers {len(p)} states, LTS has {lts.state_count}")
    canon = p.canonical()
    edges = set()
    for s, a, t in lts.transitions:
        b, c = canon[s], canon[t]
        if a == TAU and b == c and semantics == BRANCHING:
            continue
        edges.add((b, a, c))
    return Lts(canon.block_count, edges, canon[lts.initial])
