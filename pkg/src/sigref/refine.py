"""Sequential signature refinement: classic and inductive, strong and branching."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Hashable

from .actions import ActionPartition, NotWellFounded, check_wellfounded, reverse_topological_order
from .lts import TAU, Lts, Partition

# Sorted tuple of (action, block) pairs; tuples give set semantics with a
# canonical order, so equality and hashing are order-independent.
Signature = tuple[tuple[str, int], ...]


def make_signature(pairs) -> Signature:
    return tuple(sorted(set(pairs)))


def subset_with(small: Signature, big: Signature, extra: tuple[str, int] | None = None) -> bool:
    """``set(small) <= set(big) | {extra}`` by a linear merge of sorted tuples."""
    j = 0
    nbig = len(big)
    for pair in small:
        if pair == extra:
            continue
        while j < nbig and big[j] < pair:
            j += 1
        if j == nbig or big[j] != pair:
            return False
        j += 1
    return True


class IndexedSet:
    """Injective map from keys to consecutive integers, in insertion order."""

    def __init__(self, first_id: int = 0, stride: int = 1):
        self.first_id = first_id
        self.stride = stride
        self.table: dict[Hashable, int] = {}

    def put(self, key: Hashable) -> int:
        found = self.table.get(key)
        if found is None:
            found = self.first_id + len(self.table) * self.stride
            self.table[key] = found
        return found

    def clear(self) -> None:
        self.table.clear()

    def __len__(self) -> int:
        return len(self.table)


class Method(enum.Enum):
    STRONG_CLASSIC = "strong-classic"
    BRANCHING_CLASSIC = "branching-classic"
    STRONG_INDUCTIVE = "strong-inductive"
    BRANCHING_INDUCTIVE = "branching-inductive"


@dataclass
class RefineStats:
    """``iterations`` counts every signature pass, including the final one
    that confirms stability; ``splitting_rounds`` excludes it."""

    iterations: int = 0
    block_counts: list[int] = field(default_factory=list)
    signatures: list[list[Signature]] = field(default_factory=list)
    partitions: list[Partition] = field(default_factory=list)

    @property
    def final_block_count(self) -> int:
        return self.block_counts[-1] if self.block_counts else 0

    @property
    def splitting_rounds(self) -> int:
        return max(self.iterations - 1, 0)


# --- classic signatures -----------------------------------------------------

def signature_strong_classic(lts: Lts, p: Partition, s: int) -> Signature:
    return make_signature((a, p[t]) for a, t in lts.successors(s))


def signature_branching_classic(lts: Lts, p: Partition, s: int) -> Signature:
    """Pairs reachable from ``s`` via block-internal τ-steps followed by one
    visible or block-changing step. Explicit search; tolerates τ-cycles."""
    block = p[s]
    seen = {s}
    stack = [s]
    pairs = set()
    while stack:
        u = stack.pop()
        for a, t in lts.successors(u):
            if a == TAU and p[t] == block:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
            else:
                pairs.add((a, p[t]))
    return make_signature(pairs)


def strong_classic_signatures(lts: Lts, p: Partition) -> list[Signature]:
    return [signature_strong_classic(lts, p, s) for s in range(lts.state_count)]


def branching_classic_signatures(lts: Lts, p: Partition) -> list[Signature]:
    """All classic branching signatures as a least fixpoint: each state's
    direct pairs, unioned backwards along silent τ-steps until stable."""
    n = lts.state_count
    sets: list[set[tuple[str, int]]] = [set() for _ in range(n)]
    silent_pred: list[list[int]] = [[] for _ in range(n)]
    for s, a, t in lts.transitions:
        if a == TAU and p[s] == p[t]:
            if s != t:
                silent_pred[t].append(s)
        else:
            sets[s].add((a, p[t]))
    work = list(range(n))
    queued = [True] * n
    while work:
        t = work.pop()
        queued[t] = False
        for s in silent_pred[t]:
            if not sets[t] <= sets[s]:
                sets[s] |= sets[t]
                if not queued[s]:
                    queued[s] = True
                    work.append(s)
    return [tuple(sorted(x)) for x in sets]


# --- inductive signatures ---------------------------------------------------

def inductive_strong_round(
    lts: Lts, ap: ActionPartition, old: Partition, order: list[int]
) -> tuple[Partition, list[Signature]]:
    """One round of inductive strong refinement, visiting ``order``."""
    greater = {a: ap.is_greater(a) for a in lts.alphabet}
    new = [-1] * lts.state_count
    sigs: list[Signature] = [()] * lts.state_count
    ids = IndexedSet()
    for s in order:
        pairs = set()
        for a, t in lts.successors(s):
            if greater[a]:
                assert new[t] >= 0, "A_> successor visited out of order"
                pairs.add((a, new[t]))
            else:
                pairs.add((a, old[t]))
        sig = tuple(sorted(pairs))
        sigs[s] = sig
        new[s] = ids.put((old[s], sig))
    return Partition(new), sigs


def inductive_branching_round(
    lts: Lts, ap: ActionPartition, old: Partition, order: list[int]
) -> tuple[Partition, list[Signature]]:
    """One round of inductive branching refinement, visiting ``order``.

    A state inherits the signature of the first τ-successor in its old block
    whose signature, plus the τ-step into it, covers the state's own
    pre-signature.
    """
    greater = {a: ap.is_greater(a) for a in lts.alphabet}
    new = [-1] * lts.state_count
    sigs: list[Signature] = [()] * lts.state_count
    ids = IndexedSet()
    for s in order:
        pairs = set()
        tau_targets = []
        for a, t in lts.successors(s):
            if greater[a]:
                assert new[t] >= 0, "A_> successor visited out of order"
                pairs.add((a, new[t]))
            else:
                pairs.add((a, old[t]))
            if a == TAU and old[t] == old[s]:
                tau_targets.append(t)
        pre = tuple(sorted(pairs))
        sig = pre
        chosen = None
        for t in tau_targets:
            if subset_with(pre, sigs[t], (TAU, new[t])):
                if chosen is None:
                    chosen = t
                    sig = sigs[t]
                    if not __debug__:
                        break
                else:
                    assert sigs[t] == sig, (
                        f"state {s}: τ-successors {chosen} and {t} both cover pre "
                        "but carry different signatures"
                    )
        sigs[s] = sig
        new[s] = ids.put((old[s], sig))
    return Partition(new), sigs


# --- refinement driver ------------------------------------------------------

def _classic_round(signatures: Callable[[Lts, Partition], list[Signature]]):
    def round_(lts: Lts, old: Partition) -> tuple[Partition, list[Signature]]:
        sigs = signatures(lts, old)
        ids = IndexedSet()
        return Partition(ids.put((old[s], sigs[s])) for s in range(lts.state_count)), sigs

    return round_


def _iterate(lts: Lts, step, initial: Partition | None, record: bool) -> tuple[Partition, RefineStats]:
    current = initial if initial is not None else Partition.trivial(lts.state_count)
    if len(current) != lts.state_count:
        raise ValueError("initial partition does not cover the LTS")
    stats = RefineStats()
    old_count = current.block_count
    while True:
        new, sigs = step(lts, current)
        assert new.refines(current), "refinement must not merge blocks"
        stats.iterations += 1
        new_count = new.block_count
        stats.block_counts.append(new_count)
        if record:
            stats.signatures.append(sigs)
            stats.partitions.append(new)
        current = new
        if new_count == old_count:
            break
        old_count = new_count
    return current.canonical(), stats


def refine(
    lts: Lts,
    method: Method = Method.BRANCHING_CLASSIC,
    initial: Partition | None = None,
    record: bool = False,
) -> tuple[Partition, RefineStats]:
    """Classic signature refinement until the block count stops growing."""
    if method is Method.STRONG_CLASSIC:
        step = _classic_round(strong_classic_signatures)
    elif method is Method.BRANCHING_CLASSIC:
        step = _classic_round(branching_classic_signatures)
    else:
        raise ValueError(f"{method} is not a classic method")
    return _iterate(lts, step, initial, record)


def _require_wellfounded(lts: Lts, ap: ActionPartition) -> list[int]:
    witness = check_wellfounded(lts, ap)
    if witness is not None:
        raise NotWellFounded(witness)
    return reverse_topological_order(lts, ap)


def refine_inductive_strong(
    lts: Lts,
    ap: ActionPartition,
    initial: Partition | None = None,
    record: bool = False,
) -> tuple[Partition, RefineStats]:
    order = _require_wellfounded(lts, ap)
    return _iterate(
        lts, lambda l, old: inductive_strong_round(l, ap, old, order), initial, record
    )


def refine_inductive_branching(
    lts: Lts,
    ap: ActionPartition | None = None,
    initial: Partition | None = None,
    record: bool = False,
) -> tuple[Partition, RefineStats]:
    """Inductive branching refinement. The LTS must be τ-cycle-free."""
    if ap is None:
        ap = ActionPartition.branching_default(lts.alphabet | {TAU})
    if TAU not in ap.a_greater:
        raise ValueError("inductive branching refinement needs tau in A_>")
    order = _require_wellfounded(lts, ap)
    return _iterate(
        lts, lambda l, old: inductive_branching_round(l, ap, old, order), initial, record
    )


def reduce(lts: Lts, method: Method, ap: ActionPartition | None = None, **kwargs):
    """Dispatch to the refinement routine for ``method``."""
    if method is Method.STRONG_INDUCTIVE:
        if ap is None:
            raise ValueError("inductive strong refinement needs an action partition")
        return refine_inductive_strong(lts, ap, **kwargs)
    if method is Method.BRANCHING_INDUCTIVE:
        return refine_inductive_branching(lts, ap, **kwargs)
    return refine(lts, method, **kwargs)
