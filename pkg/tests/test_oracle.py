import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from samples import chain6, fan_left, fan_middle, random_lts, ring, tau_pair_cycle
from sigref.lts import TAU, Lts, Partition
from sigref.oracle import (
    OracleLimitExceeded,
    StateRelation,
    coarsest_branching_bisimulation,
    coarsest_strong_bisimulation,
    is_branching_bisimulation,
    is_canonical,
    is_strong_bisimulation,
)


def test_chain_all_distinct():
    assert coarsest_strong_bisimulation(chain6()).block_count == 6


def test_self_loop_twins():
    lts = Lts(2, [(0, "a", 0), (1, "a", 1)])
    assert coarsest_strong_bisimulation(lts).block_count == 1


def test_ring3_by_hand():
    # Deleting pairs by hand: (0,1), (0,2) fail on 0's b-loop; then (1,2) fails
    # because 1 -a-> 2 and 2 -a-> 0 land in different classes.
    assert coarsest_strong_bisimulation(ring(3)).block_of == (0, 1, 2)


def test_ring8():
    assert coarsest_strong_bisimulation(ring(8)).block_count == 8


def test_fan_examples():
    assert coarsest_branching_bisimulation(fan_left()).block_of[:3] == (0, 0, 0)
    p = coarsest_branching_bisimulation(fan_middle())
    assert len({p[0], p[1], p[2]}) == 3


def test_tau_pair_one_block():
    assert coarsest_branching_bisimulation(tau_pair_cycle()).block_count == 1


def test_identity_relation_is_bisimulation():
    lts = fan_middle()
    assert is_branching_bisimulation(lts, StateRelation.identity(lts.state_count)) == (True, None)
    assert is_strong_bisimulation(lts, StateRelation.identity(lts.state_count)) == (True, None)


def test_total_relation_on_middle_fan_fails():
    lts = fan_middle()
    ok, witness = is_branching_bisimulation(lts, StateRelation.total(lts.state_count))
    assert not ok
    s, t, (src, a, dst) = witness
    assert s == src == 0


def test_limit():
    with pytest.raises(OracleLimitExceeded):
        coarsest_strong_bisimulation(ring(5), limit=4)


def test_canonical():
    lts = fan_left()
    assert not is_canonical(lts, 0)
    assert not is_canonical(lts, 1)
    assert is_canonical(lts, 2)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 8), st.floats(0.5, 3))
def test_oracle_outputs_are_maximal(seed, n, density):
    lts = random_lts(random.Random(seed), n, density)
    strong = coarsest_strong_bisimulation(lts)
    branching = coarsest_branching_bisimulation(lts)
    assert strong.refines(branching)
    rel = StateRelation.from_partition(branching)
    assert is_branching_bisimulation(lts, rel)[0]
    assert is_strong_bisimulation(lts, StateRelation.from_partition(strong))[0]
    for s, t in itertools.combinations(range(n), 2):
        if branching[s] == branching[t]:
            continue
        bigger = [row[:] for row in rel.matrix]
        bigger[s][t] = bigger[t][s] = True
        assert not is_branching_bisimulation(lts, StateRelation(bigger))[0]


def test_relation_to_partition_requires_equivalence():
    r = StateRelation([[True, True, False], [True, True, True], [False, True, True]])
    with pytest.raises(ValueError):
        r.to_partition()
    assert StateRelation.from_partition(Partition([1, 0, 1])).to_partition().same_relation(Partition([1, 0, 1]))
