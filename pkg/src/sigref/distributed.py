"""Simulated distributed inductive branching reduction.

Each :class:`Worker` owns a slice of the states together with their in- and
out-edges and only ever talks to other workers through :class:`Message`
objects routed by :class:`Scheduler`. A round follows the usual worker loop:
forward old IDs to predecessors, compute a signature once every successor
datum has arrived, resolve the (old ID, signature) pair at its owning
worker, then forward the new ID to A_> predecessors.
"""
from __future__ import annotations

import enum
import random
import struct
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .actions import ActionPartition, NotWellFounded, check_wellfounded
from .lts import TAU, Lts, Partition

Signature = tuple[tuple[str, int], ...]

MASK64 = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def splitmix64(x: int) -> int:
    """SplitMix64 finaliser."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def encode_pair(old_id: int, sig: Signature) -> bytes:
    """Canonical little-endian encoding of an (old ID, signature) pair."""
    parts = [struct.pack("<qI", old_id, len(sig))]
    for label, block in sig:
        raw = label.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<q", block))
    return b"".join(parts)


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def pair_hash(old_id: int, sig: Signature) -> int:
    """FNV-1a over :func:`encode_pair`, then :func:`splitmix64`."""
    return splitmix64(fnv1a64(encode_pair(old_id, sig)))


@dataclass(frozen=True)
class OwnerMaps:
    workers: int
    state_owner: Callable[[int], int]
    pair_owner: Callable[[int, Signature], int]
    name: str = "custom"

    @classmethod
    def modulo(cls, workers: int) -> OwnerMaps:
        return cls(
            workers,
            lambda s: s % workers,
            lambda old, sig: pair_hash(old, sig) % workers,
            "modulo",
        )

    @classmethod
    def hashed(cls, workers: int) -> OwnerMaps:
        return cls(
            workers,
            lambda s: splitmix64(s) % workers,
            lambda old, sig: pair_hash(old, sig) % workers,
            "hash",
        )

    @classmethod
    def named(cls, name: str, workers: int) -> OwnerMaps:
        if name == "modulo":
            return cls.modulo(workers)
        if name == "hash":
            return cls.hashed(workers)
        raise ValueError(f"unknown owner map {name!r}")


class MsgKind(enum.Enum):
    SET_OLD = "set_old"
    SET_SIG = "set_sig"
    GET_GLOBAL = "get_global"
    SET_GLOBAL = "set_global"
    SET_NEW = "set_new"


@dataclass(frozen=True, slots=True)
class Message:
    kind: MsgKind
    dest: int
    target: int  # edge for SET_OLD/SET_SIG/SET_NEW, state otherwise
    ident: int | None = None
    sig: Signature | None = None


class _SigStore:
    """Interned, reference-counted signatures resident on one worker."""

    def __init__(self):
        self.refs: dict[Signature, list] = {}
        self.entries = 0
        self.peak = 0

    def hold(self, sig: Signature) -> Signature:
        slot = self.refs.get(sig)
        if slot is None:
            slot = self.refs[sig] = [sig, 0]
            self.entries += len(sig)
            self.peak = max(self.peak, self.entries)
        slot[1] += 1
        return slot[0]

    def release(self, sig: Signature | None) -> None:
        if sig is None:
            return
        slot = self.refs[sig]
        slot[1] -= 1
        if slot[1] == 0:
            del self.refs[sig]
            self.entries -= len(sig)

    def reset_peak(self) -> None:
        self.peak = self.entries


class Worker:
    """One worker's private state. Reads nothing but its own arrays."""

    def __init__(
        self,
        me: int,
        lts: Lts,
        ap: ActionPartition,
        owners: OwnerMaps,
        send: Callable[[Message], None],
    ):
        self.me = me
        self.workers = owners.workers
        self.owners = owners
        self.send = send
        self.states = [s for s in range(lts.state_count) if owners.state_owner(s) == me]
        greater = {a: ap.is_greater(a) for a in lts.alphabet}
        # per owned state: (edge, label, other endpoint)
        self.out_edges = {
            s: [(e, lts.transitions[e][1], lts.transitions[e][2]) for e in lts.succ[s]]
            for s in self.states
        }
        self.in_edges = {
            s: [(e, lts.transitions[e][1], lts.transitions[e][0]) for e in lts.pred[s]]
            for s in self.states
        }
        self.edge_src = {e: s for s in self.states for e, _, _ in self.out_edges[s]}
        self.edge_label = {e: a for s in self.states for e, a, _ in self.out_edges[s]}
        self.greater = greater
        self.e_question = [e for e, a in self.edge_label.items() if not greater[a]]
        self.e_greater = [e for e, a in self.edge_label.items() if greater[a]]
        self.e_tau = [e for e, a in self.edge_label.items() if a == TAU]

        self.old_id: dict[int, int] = {}
        self.current_id: dict[int, int | None] = {s: 0 for s in self.states}
        self.dst_old: dict[int, int | None] = {}
        self.dst_new: dict[int, int | None] = {}
        self.dest_sig: dict[int, Signature | None] = {}
        self.old_queue: deque[int] = deque()
        self.sig_queue: deque[int] = deque()
        self.new_queue: deque[int] = deque()
        self.enqueued: set[int] = set()
        self.index_count = 0
        self.index_table: dict[tuple[int, Signature], int] = {}
        self.store = _SigStore()

    @property
    def owned_out_edges(self) -> int:
        return len(self.edge_src)

    @property
    def signature_bound(self) -> int:
        return len(self.states) + self.owned_out_edges

    def stored_edge_entries(self) -> int:
        return sum(len(v) for v in self.out_edges.values()) + sum(
            len(v) for v in self.in_edges.values()
        )

    # --- indexed set ---------------------------------------------------------

    def indexed_set_clear(self) -> None:
        for old, sig in self.index_table:
            self.store.release(sig)
        self.index_count = 0
        self.index_table = {}

    def indexed_set_put(self, pair: tuple[int, Signature]) -> int:
        found = self.index_table.get(pair)
        if found is None:
            old, sig = pair
            pair = (old, self.store.hold(sig))
            found = self.index_count * self.workers + self.me
            self.index_table[pair] = found
            self.index_count += 1
        return found

    # --- round control -------------------------------------------------------

    def start_round(self) -> None:
        self.indexed_set_clear()
        for s in self.states:
            self.old_id[s] = self.current_id[s]
            self.current_id[s] = None
        for e in self.e_question:
            self.dst_old[e] = None
        for e in self.e_greater:
            self.dst_new[e] = None
        for e in self.e_tau:
            self.store.release(self.dest_sig.get(e))
            self.dest_sig[e] = None
            self.dst_old[e] = None
        self.old_queue = deque(self.states)
        sinks = [s for s in self.states if not self.out_edges[s]]
        self.sig_queue = deque(sinks)
        self.new_queue = deque()
        self.enqueued = set(sinks)
        self.store.reset_peak()

    def check_ready(self, s: int) -> bool:
        """Queue ``s`` for signature computation once all successor data is in."""
        if s in self.enqueued:
            return True
        for e, a, _ in self.out_edges[s]:
            if self.greater[a]:
                if self.dst_new[e] is None:
                    return False
            elif self.dst_old[e] is None:
                return False
            if a == TAU and (self.dst_old[e] is None or self.dest_sig[e] is None):
                return False
        self.enqueued.add(s)
        self.sig_queue.append(s)
        return True

    def compute_sig(self, s: int) -> Signature:
        pre = set()
        for e, a, _ in self.out_edges[s]:
            pre.add((a, self.dst_new[e] if self.greater[a] else self.dst_old[e]))
        for e, a, _ in self.out_edges[s]:
            if a == TAU and self.old_id[s] == self.dst_old[e]:
                if pre <= set(self.dest_sig[e]) | {(TAU, self.dst_new[e])}:
                    return self.dest_sig[e]
        return tuple(sorted(pre))

    # --- queue steps ---------------------------------------------------------

    def take_old(self, s: int) -> None:
        for e, a, src in self.in_edges[s]:
            if a == TAU or not self.greater[a]:
                self.send(Message(MsgKind.SET_OLD, self.owners.state_owner(src), e, self.old_id[s]))

    def take_sig(self, s: int) -> None:
        # The signature only lives in outgoing messages; the owner of the
        # (old ID, signature) pair keeps the one resident copy.
        sig = self.compute_sig(s)
        for e, a, _ in self.out_edges[s]:
            if a == TAU:
                self.store.release(self.dest_sig[e])
                self.dest_sig[e] = None
        for e, a, src in self.in_edges[s]:
            if a == TAU:
                self.send(Message(MsgKind.SET_SIG, self.owners.state_owner(src), e, sig=sig))
        owner = self.owners.pair_owner(self.old_id[s], sig)
        self.send(Message(MsgKind.GET_GLOBAL, owner, s, self.old_id[s], sig))

    def take_new(self, s: int) -> None:
        for e, a, src in self.in_edges[s]:
            if self.greater[a]:
                self.send(Message(MsgKind.SET_NEW, self.owners.state_owner(src), e, self.current_id[s]))

    # --- message handlers ----------------------------------------------------

    def receive(self, msg: Message) -> None:
        kind = msg.kind
        if kind is MsgKind.SET_OLD:
            self.dst_old[msg.target] = msg.ident
            self.check_ready(self.edge_src[msg.target])
        elif kind is MsgKind.SET_SIG:
            self.dest_sig[msg.target] = self.store.hold(msg.sig)
            self.check_ready(self.edge_src[msg.target])
        elif kind is MsgKind.GET_GLOBAL:
            ident = self.indexed_set_put((msg.ident, msg.sig))
            self.send(Message(MsgKind.SET_GLOBAL, self.owners.state_owner(msg.target), msg.target, ident))
        elif kind is MsgKind.SET_GLOBAL:
            self.current_id[msg.target] = msg.ident
            self.new_queue.append(msg.target)
        elif kind is MsgKind.SET_NEW:
            self.dst_new[msg.target] = msg.ident
            self.check_ready(self.edge_src[msg.target])
        else:  # pragma: no cover
            raise ValueError(kind)

    def queues_empty(self) -> bool:
        return not (self.old_queue or self.sig_queue or self.new_queue)


def distributed_sum(values: Iterable[int]) -> int:
    return sum(values)


class Schedule(enum.Enum):
    WAVES = "waves"
    RANDOM = "random"


@dataclass
class RoundStats:
    messages: Counter = field(default_factory=Counter)
    waves: int = 0
    steps: int = 0
    max_in_flight: int = 0
    block_count: int = 0
    peak_signature_entries: list[int] = field(default_factory=list)
    index_table_entries: int = 0


@dataclass
class EngineStats:
    workers: int
    rounds: list[RoundStats] = field(default_factory=list)
    duplicated_edges: int = 0
    signature_bounds: list[int] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.rounds)

    @property
    def splitting_rounds(self) -> int:
        return max(len(self.rounds) - 1, 0)

    @property
    def block_counts(self) -> list[int]:
        return [r.block_count for r in self.rounds]

    def total_messages(self) -> Counter:
        total: Counter = Counter()
        for r in self.rounds:
            total.update(r.messages)
        return total


class Scheduler:
    """Single-threaded message router. Deterministic given (mode, seed)."""

    def __init__(self, workers: list[Worker], schedule: Schedule, seed: int, max_in_flight: int | None):
        self.workers = workers
        self.schedule = schedule
        self.rng = random.Random(seed)
        self.cap = max_in_flight
        self.network: list[Message] = []
        self.round: RoundStats = RoundStats()

    def send(self, msg: Message) -> None:
        if not 0 <= msg.dest < len(self.workers):
            raise ValueError(f"owner {msg.dest} out of range for {len(self.workers)} workers")
        self.network.append(msg)
        self.round.messages[msg.kind] += 1
        if len(self.network) > self.round.max_in_flight:
            self.round.max_in_flight = len(self.network)

    def _blocked(self) -> bool:
        return self.cap is not None and len(self.network) >= self.cap

    def _deliver(self, msg: Message) -> None:
        self.round.steps += 1
        self.workers[msg.dest].receive(msg)

    def run_round(self, stats: RoundStats) -> None:
        self.round = stats
        if self.schedule is Schedule.WAVES:
            self._run_waves()
        else:
            self._run_random()

    def _quiet(self) -> bool:
        return not self.network and all(w.queues_empty() for w in self.workers)

    def _drain(self, queue, take) -> None:
        while queue and not self._blocked():
            self.round.steps += 1
            take(queue.popleft())

    def _deliver_batch(self) -> None:
        batch, self.network = self.network, []
        for msg in batch:
            self._deliver(msg)

    def _run_waves(self) -> None:
        # old IDs first, globally; SET_OLD handlers send nothing further
        while self.network or any(w.old_queue for w in self.workers):
            for w in self.workers:
                self._drain(w.old_queue, w.take_old)
            self._deliver_batch()
        while not self._quiet():
            self.round.waves += 1
            for w in self.workers:
                self._drain(w.sig_queue, w.take_sig)
                self._drain(w.new_queue, w.take_new)
            self._deliver_batch()

    def _run_random(self) -> None:
        rng = self.rng
        while not self._quiet():
            queues = []
            if not self._blocked():
                for w in self.workers:
                    for queue, take in (
                        (w.old_queue, w.take_old),
                        (w.sig_queue, w.take_sig),
                        (w.new_queue, w.take_new),
                    ):
                        if queue:
                            queues.append((queue, take))
            r = rng.randrange(len(self.network) + len(queues))
            if r < len(self.network):
                net = self.network
                net[r], net[-1] = net[-1], net[r]
                self._deliver(net.pop())
            else:
                queue, take = queues[r - len(self.network)]
                i = rng.randrange(len(queue))
                queue.rotate(-i)
                s = queue.popleft()
                queue.rotate(i)
                self.round.steps += 1
                take(s)


def build_workers(lts: Lts, ap: ActionPartition, owners: OwnerMaps, send) -> list[Worker]:
    for s in range(lts.state_count):
        w = owners.state_owner(s)
        if not 0 <= w < owners.workers:
            raise ValueError(f"state {s} mapped to worker {w}, expected 0..{owners.workers - 1}")
    return [Worker(me, lts, ap, owners, send) for me in range(owners.workers)]


def run_distributed_reduce(
    lts: Lts,
    ap: ActionPartition | None = None,
    workers: int = 1,
    owners: OwnerMaps | None = None,
    schedule: Schedule = Schedule.WAVES,
    seed: int = 0,
    max_in_flight: int | None = -1,
) -> tuple[Partition, EngineStats]:
    """Inductive branching reduction on ``workers`` simulated workers.

    ``max_in_flight=-1`` selects the default cap: unbounded for waves, 1024
    for random schedules. ``None`` means unbounded.
    """
    if workers < 1:
        raise ValueError("need at least one worker")
    if ap is None:
        ap = ActionPartition.branching_default(lts.alphabet | {TAU})
    if TAU not in ap.a_greater:
        raise ValueError("distributed reduction needs tau in A_>")
    witness = check_wellfounded(lts, ap)
    if witness is not None:
        raise NotWellFounded(witness)
    if owners is None:
        owners = OwnerMaps.modulo(workers)
    if owners.workers != workers:
        raise ValueError("owner maps built for a different worker count")
    if max_in_flight == -1:
        max_in_flight = None if schedule is Schedule.WAVES else 1024
    if max_in_flight is not None and max_in_flight < 1:
        raise ValueError("max_in_flight must be positive")

    scheduler = Scheduler([], schedule, seed, max_in_flight)
    pool = build_workers(lts, ap, owners, scheduler.send)
    scheduler.workers = pool

    stats = EngineStats(workers)
    stats.signature_bounds = [w.signature_bound for w in pool]
    stats.duplicated_edges = sum(
        1 for s, _, t in lts.transitions if owners.state_owner(s) != owners.state_owner(t)
    )

    old_count, new_count = 0, 1
    while old_count != new_count:
        old_count = new_count
        for w in pool:
            w.start_round()
        rnd = RoundStats()
        scheduler.run_round(rnd)
        undefined = [s for w in pool for s in w.states if w.current_id[s] is None]
        if undefined:
            raise RuntimeError(f"quiescent with undefined IDs for states {undefined[:10]}")
        new_count = distributed_sum(w.index_count for w in pool)
        rnd.block_count = new_count
        rnd.peak_signature_entries = [w.store.peak for w in pool]
        rnd.index_table_entries = sum(len(sig) for w in pool for _, sig in w.index_table)
        if stats.rounds:
            assert new_count >= stats.rounds[-1].block_count
        stats.rounds.append(rnd)

    block = [0] * lts.state_count
    for w in pool:
        for s in w.states:
            block[s] = w.current_id[s]
    return Partition(block).canonical(), stats
