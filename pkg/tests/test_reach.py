import pytest

from backend.an_core import GlobalState, Network, NetworkError, Trace, apply_trace, trace_post, validate_trace
from backend.oracle import GeneratorParams, exists_until, random_instance
from backend.reach import (ASYNC, STEP, LimitExceeded, Limits, ReachabilityEngine, count_states,
                           playable_steps, reachable, reachable_states, verify_cut_set)
from backend.reduction import Goal, reduce


def test_reach_example_async(example, example_initial, ls, t):
    result = reachable(example, example_initial, Goal(ls('c', 2)))
    assert result.reachable is True
    assert result.verdict == 'reachable'
    assert len(result.witness) == 3
    assert validate_trace(example, example_initial, result.witness)
    assert ls('c', 2) in trace_post(result.witness)
    assert result.witness == Trace([[t('a', 0, 1)], [t('c', 0, 1)], [t('c', 1, 2)]])


def test_reach_example_step_semantics(example, example_initial, ls):
    result = reachable(example, example_initial, ls('c', 2), STEP)
    assert result.reachable
    assert len(result.witness) == 3
    assert validate_trace(example, example_initial, result.witness)


def test_unreachable_goal(example, example_initial, ls):
    for semantics in (ASYNC, STEP):
        result = reachable(example, example_initial, ls('d', 1), semantics)
        assert result.reachable is False
        assert result.witness is None
        assert not result.inconclusive


def test_goal_in_initial_state(example, example_initial, ls):
    result = reachable(example, example_initial, ls('a', 0))
    assert result.reachable
    assert result.witness == Trace()


def test_partial_assignment_goal(example, example_initial, ls):
    result = reachable(example, example_initial, {ls('a', 1), ls('b', 1), ls('c', 2)})
    assert result.reachable
    final = apply_trace(example, example_initial, result.witness)
    assert final.contains_all({ls('a', 1), ls('b', 1), ls('c', 2)})


def test_limits_give_inconclusive_verdict(example, example_initial, ls):
    result = reachable(example, example_initial, ls('c', 2), limits=Limits(max_states=2))
    assert result.inconclusive
    assert result.verdict == 'inconclusive'
    result = reachable(example, example_initial, ls('c', 2), limits=Limits(max_steps=1))
    assert result.reachable is None
    with pytest.raises(ValueError):
        Limits(max_states=0)


def test_count_states(example, example_initial, ls):
    assert count_states(example, example_initial) == 12
    assert count_states(example.with_transitions([]), example_initial) == 1
    reduced = reduce(example, example_initial, Goal(ls('c', 2))).reduced
    assert count_states(reduced, example_initial) == 4
    assert count_states(example, example_initial, Limits(max_states=5)) is None
    with pytest.raises(LimitExceeded):
        reachable_states(example, example_initial, limits=Limits(max_states=5))


def test_step_semantics_covers_async(example, example_initial):
    async_states = reachable_states(example, example_initial, ASYNC)
    step_states = reachable_states(example, example_initial, STEP)
    assert async_states <= step_states


def test_step_semantics_can_reach_more():
    # 两个自动机需要同时翻转：异步语义下先动的一方会让另一方失效
    network = Network.build({'x': [0, 1], 'y': [0, 1]},
                            [('x', 0, 1, {'y': 0}), ('y', 0, 1, {'x': 0})])
    initial = network.initial_state()
    assert not reachable(network, initial, {network.local('x', 1), network.local('y', 1)}).reachable
    assert reachable(network, initial, {network.local('x', 1), network.local('y', 1)}, STEP).reachable


def test_playable_steps(example, t):
    state = GlobalState((1, 0, 0, 0))
    steps = {tuple(step.transitions) for step in playable_steps(example, state)}
    enabled = [t('a', 1, 0), t('b', 0, 1), t('c', 0, 1)]
    assert len(steps) == 2 ** len(enabled) - 1
    assert (t('a', 1, 0), t('b', 0, 1), t('c', 0, 1)) in steps


def test_engine_rejects_unknown_semantics(example):
    with pytest.raises(ValueError):
        ReachabilityEngine(example, 'synchronous')


def test_cut_sets(example, example_initial, ls):
    goal = Goal(ls('c', 2))
    assert verify_cut_set(example, example_initial, goal, {ls('a', 1)})
    assert not verify_cut_set(example, example_initial, goal, {ls('b', 1)})
    assert not verify_cut_set(example, example_initial, goal, set())
    assert verify_cut_set(example, example_initial, goal, {ls('c', 1)})
    assert verify_cut_set(example, example_initial, goal, {ls('a', 1), ls('b', 1)})


def test_cut_set_preconditions(example, example_initial, ls):
    with pytest.raises(NetworkError):
        verify_cut_set(example, example_initial, Goal(ls('c', 2)), {ls('a', 0)})
    with pytest.raises(NetworkError):
        verify_cut_set(example, example_initial, Goal(ls('c', 2)), {ls('c', 2)})


def test_cut_sets_match_until_formula(example, example_initial, ls):
    goal = Goal(ls('c', 2))
    for cut in ({ls('a', 1)}, {ls('b', 1)}, {ls('c', 1)}, {ls('d', 1)}, set()):
        assert verify_cut_set(example, example_initial, goal, cut) == \
            (not exists_until(example, example_initial, cut, goal))


@pytest.mark.parametrize('seed', range(1, 51))
def test_cut_set_monotonicity(seed):
    network, initial, goal = random_instance(GeneratorParams(seed=seed))
    if goal.target in initial:
        return
    candidates = [ls for a in range(len(network.automata)) for ls in
                  (network.local(network.automata[a], label) for label in network.states[a])
                  if ls not in initial and ls != goal.target]
    smaller = set()
    previous = verify_cut_set(network, initial, goal, smaller)
    for ls in candidates:
        larger = smaller | {ls}
        current = verify_cut_set(network, initial, goal, larger)
        assert current or not previous
        smaller, previous = larger, current


@pytest.mark.parametrize('seed', range(1, 51))
def test_witness_is_shortest(seed):
    network, initial, goal = random_instance(GeneratorParams(seed=seed))
    for semantics in (ASYNC, STEP):
        result = reachable(network, initial, goal, semantics)
        if not result.reachable:
            continue
        assert validate_trace(network, initial, result.witness)
        assert goal.target in apply_trace(network, initial, result.witness)
        # 更短的轨迹不存在：逐层展开到见证长度减一都没有到达目标
        engine = ReachabilityEngine(network, semantics)
        layer = {initial.assignment}
        for _ in range(len(result.witness)):
            assert not any(state[goal.target.automaton] == goal.target.index for state in layer)
            layer = {succ for state in layer for _, succ in engine.successors(state)}
