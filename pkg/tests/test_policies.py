import random

import pytest
from hypothesis import given, settings, strategies as st

from baas_sim.entities import VmSpec, VmState
from baas_sim.policies import (INFINITE, AgingReadyQueue, HybridParams, PolicyId, ReadyTask,
                               assign_vm, effective_priority, make_ready_queue, select,
                               select_fcfs, select_hybrid, select_priority, select_sjf)


def task(cid, arr=0, length=1000, p=0):
    return ReadyTask(cid, arr, length, p, cid)


@pytest.mark.parametrize("p, arr, now, q, expected", [
    (2, 0, 0, 100000, 2),
    (2, 0, 200000, 100000, 0),
    (5, 0, 60000, 20000, 2),
    (5, 0, 10**9, INFINITE, 5),
    (3, 100, 119, 20, 3),
    (3, 100, 120, 20, 2),
])
def test_effective_priority(p, arr, now, q, expected):
    assert effective_priority(p, arr, now, q) == expected


def test_policy_parse():
    assert PolicyId.parse("HyBrId") is PolicyId.HYBRID
    with pytest.raises(ValueError, match="unknown policy: sjjf"):
        PolicyId.parse("sjjf")


def test_hybrid_params_validation():
    with pytest.raises(ValueError):
        HybridParams(0)
    with pytest.raises(ValueError):
        HybridParams(20000, 0)
    HybridParams(INFINITE, 1)


def test_select_fcfs():
    assert select_fcfs([task(1, arr=10), task(2, arr=5)]) == 2
    assert select_fcfs([task(1, arr=5), task(2, arr=5)]) == 1
    assert select_fcfs([]) is None


def test_select_sjf():
    assert select_sjf([task(1, length=40000), task(2, length=20000)]) == 2
    assert select_sjf([task(1, arr=10), task(2, arr=5)]) == 2
    assert select_sjf([]) is None


def test_select_priority():
    assert select_priority([task(1, p=3), task(2, p=0)]) == 2
    assert select_priority([task(1, arr=10), task(2, arr=5)]) == 2
    assert select_priority([]) is None


def test_select_hybrid_starvation_scenario():
    low = task(0, arr=0, length=10000, p=5)
    h1 = task(2, arr=50000, length=25000, p=0)
    h2 = task(3, arr=100000, length=25000, p=0)
    params = HybridParams(20000, 8)
    assert select_hybrid([low, h1, h2], 100000, params) == 0
    # one quantum earlier L is still at level 1
    assert select_hybrid([low, h1, h2], 80000, params) == 2


def test_assign_vm():
    a = VmState(VmSpec(0), total_busy_ms=160000)
    b = VmState(VmSpec(1), total_busy_ms=80000)
    assert assign_vm([a, b]) == 1
    assert assign_vm([VmState(VmSpec(0)), VmState(VmSpec(1))]) == 0
    assert assign_vm([a]) == 0
    with pytest.raises(ValueError):
        assign_vm([])


tasks_st = st.lists(
    st.tuples(st.integers(0, 200), st.integers(1, 50), st.integers(0, 7)),
    min_size=1, max_size=30,
).map(lambda rows: [task(i, a, l, p) for i, (a, l, p) in enumerate(rows)])


@settings(max_examples=200, deadline=None)
@given(tasks=tasks_st, now=st.integers(200, 1000), q=st.sampled_from([1, 7, 50, INFINITE]),
       seed=st.integers(0, 1000))
def test_selection_total_and_permutation_invariant(tasks, now, q, seed):
    params = HybridParams(q, 8)
    shuffled = list(tasks)
    random.Random(seed).shuffle(shuffled)
    ids = {t.cloudlet_id for t in tasks}
    for policy in PolicyId:
        a = select(policy, tasks, now, params)
        assert a in ids
        assert a == select(policy, shuffled, now, params)


@settings(max_examples=200, deadline=None)
@given(tasks=tasks_st, now=st.integers(200, 1000))
def test_hybrid_reductions(tasks, now):
    inf = HybridParams(INFINITE, 8)
    same_p = [t._replace(priority=3) for t in tasks]
    assert select_hybrid(same_p, now, inf) == select_sjf(same_p)
    same_len = [t._replace(length_mi=10) for t in tasks]
    assert select_hybrid(same_len, now, inf) == select_priority(same_len)
    assert select_sjf(same_len) == select_fcfs(same_len)


@given(p=st.integers(0, 20), arr=st.integers(0, 10**6), q=st.integers(1, 10**5),
       d1=st.integers(0, 10**7), d2=st.integers(0, 10**7))
def test_aging_monotone_and_bounded(p, arr, q, d1, d2):
    lo, hi = sorted((d1, d2))
    assert effective_priority(p, arr, arr + hi, q) <= effective_priority(p, arr, arr + lo, q)
    assert effective_priority(p, arr, arr + p * q, q) == 0


@settings(max_examples=150, deadline=None)
@given(
    rows=st.lists(st.tuples(st.integers(0, 300), st.integers(1, 40), st.integers(0, 7)),
                  min_size=1, max_size=40),
    ops=st.lists(st.integers(0, 60), min_size=1, max_size=60),
    policy=st.sampled_from(list(PolicyId)),
    q=st.sampled_from([1, 13, 40, INFINITE]),
)
def test_indexed_queue_matches_reference(rows, ops, policy, q):
    """Interleave arrivals and pops in time order; the indexed queue must
    choose exactly what the reference argmin chooses."""
    params = HybridParams(q, 8)
    arrivals = sorted(((a, i, l, p) for i, (a, l, p) in enumerate(rows)))
    rq = make_ready_queue(policy, params)
    ready = {}
    now = 0
    k = 0
    for step in ops:
        now += step
        while k < len(arrivals) and arrivals[k][0] <= now:
            a, i, l, p = arrivals[k]
            t = task(i, a, l, p)
            ready[i] = t
            rq.add(t, now)
            k += 1
        if ready:
            expected = select(policy, ready.values(), now, params)
            got = rq.pop(now)
            assert got.cloudlet_id == expected
            del ready[expected]
        assert len(rq) == len(ready)


def test_aging_queue_rejects_out_of_range_priority():
    rq = AgingReadyQueue(HybridParams(100, 4))
    with pytest.raises(ValueError):
        rq.add(task(0, p=4), 0)
