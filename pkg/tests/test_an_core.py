import pytest

from backend.an_core import (GlobalState, LocalState, Network, NetworkError, Step, Trace, Transition,
                             apply_step, apply_trace, playable, step_post, step_pre, trace_post,
                             trace_pre, transitions_of, validate_trace)
from backend.reach import playable_steps, reachable_states


def three_step(t):
    return Trace([[t('a', 0, 1)], [t('c', 0, 1)], [t('c', 1, 2)]])


def five_step(t):
    return Trace([[t('a', 0, 1)], [t('b', 0, 1), t('c', 0, 1)], [t('a', 1, 0)],
                  [t('b', 1, 0)], [t('c', 1, 2)]])


def test_local_state_equality():
    assert LocalState(0, 1) == LocalState(0, 1)
    assert LocalState(0, 1) != LocalState(1, 1)
    assert LocalState(0, 1) != LocalState(0, 0)


def test_transition_structural_constraints():
    a0, a1, b0, b1 = LocalState(0, 0), LocalState(0, 1), LocalState(1, 0), LocalState(1, 1)
    with pytest.raises(NetworkError):
        Transition(a0, a0)
    with pytest.raises(NetworkError):
        Transition(a0, b1)
    with pytest.raises(NetworkError):
        Transition(a0, a1, {a1})
    with pytest.raises(NetworkError):
        Transition(a0, a1, {b0, b1})
    t = Transition(a0, a1, {b0})
    assert t.pre == {a0, b0}
    assert t.post == {a1, b0}


def test_network_structure(example):
    assert example.automata == ('a', 'b', 'c', 'd')
    assert [len(ts) for ts in example.transitions] == [2, 2, 4, 0]
    assert len(example.all_transitions) == 8
    assert example.product_size() == 24


def test_network_rejects_foreign_states():
    with pytest.raises(NetworkError):
        Network(['a'], [[0, 1]], [Transition(LocalState(0, 0), LocalState(0, 2))])
    with pytest.raises(NetworkError):
        Network([], [])
    with pytest.raises(NetworkError):
        Network(['a', 'a'], [[0], [0]])
    with pytest.raises(NetworkError):
        Network(['a'], [[]])


def test_build_by_labels():
    network = Network.build({'x': [3, 7], 'y': [0, 1]}, [('x', 3, 7, {'y': 1})])
    t = network.all_transitions[0]
    assert t.origin == LocalState(0, 0) and t.destination == LocalState(0, 1)
    assert t.condition == {LocalState(1, 1)}
    assert network.describe_transition(t) == '"x" 3 -> 7 when "y"=1'


def test_step_pre(t, ls):
    assert step_pre([]) == frozenset()
    assert step_pre([t('a', 0, 1)]) == {ls('a', 0), ls('b', 0)}
    assert step_pre([t('a', 0, 1), t('c', 0, 1)]) == {ls('a', 0), ls('b', 0), ls('c', 0), ls('a', 1)}


def test_step_post(t, ls):
    assert step_post([]) == frozenset()
    assert step_post([t('a', 0, 1)]) == {ls('a', 1), ls('b', 0)}
    assert step_post([t('a', 0, 1), t('b', 0, 1)]) == {ls('a', 1), ls('b', 1)}


def test_step_exclusivity(t):
    with pytest.raises(NetworkError):
        step_pre([t('c', 0, 1), t('c', 1, 2)])
    with pytest.raises(NetworkError):
        Step((t('a', 0, 1), t('a', 1, 0)))
    # 同一迁移重复出现也算两个迁移
    with pytest.raises(NetworkError):
        Step((t('a', 0, 1), t('a', 0, 1)))
    with pytest.raises(NetworkError):
        step_pre([t('a', 0, 1), t('a', 0, 1)])
    # a0 与 a1 同时出现在前置条件中
    with pytest.raises(NetworkError):
        Step((t('a', 0, 1), t('c', 0, 1)))


def test_step_is_canonical(t):
    assert Step((t('c', 1, 2), t('a', 1, 0))) == Step((t('a', 1, 0), t('c', 1, 2)))


def test_playable(example, example_initial, t):
    assert playable(example, example_initial, [t('a', 0, 1)])
    assert not playable(example, example_initial, [t('c', 0, 2)])
    assert playable(example, example_initial, [])
    foreign = Transition(LocalState(0, 0), LocalState(0, 1))
    with pytest.raises(NetworkError):
        playable(example, example_initial, [foreign])


def test_apply_step(example, example_initial, t):
    assert apply_step(example, example_initial, [t('a', 0, 1)]) == GlobalState((1, 0, 0, 0))
    assert apply_step(example, example_initial, []) == example_initial
    state = GlobalState((1, 0, 1, 0))
    assert apply_step(example, state, [t('a', 1, 0), t('c', 1, 2)]) == GlobalState((0, 0, 2, 0))
    with pytest.raises(NetworkError):
        apply_step(example, example_initial, [t('c', 1, 2)])


def test_validate_trace(example, example_initial, t):
    assert validate_trace(example, example_initial, five_step(t))
    assert validate_trace(example, example_initial, three_step(t))
    check = validate_trace(example, example_initial, Trace([[t('c', 1, 2)]]))
    assert not check
    assert check.failed_step == 1


def test_trace_pre_post(example, example_initial, t, ls):
    assert trace_pre(Trace()) == frozenset() and trace_post(Trace()) == frozenset()
    trace = three_step(t)
    assert trace_pre(trace) == {ls('a', 0), ls('b', 0), ls('c', 0)}
    assert ls('c', 2) in trace_post(trace)
    single = Trace([[t('a', 0, 1)]])
    assert trace_pre(single) == {ls('a', 0), ls('b', 0)}
    assert trace_post(single) == {ls('a', 1), ls('b', 0)}
    final = apply_trace(example, example_initial, trace)
    assert trace_pre(trace) <= example_initial.locals()
    assert trace_post(trace) <= final.locals()


def test_transitions_of(t):
    assert transitions_of(Trace()) == frozenset()
    assert transitions_of(three_step(t)) == {t('a', 0, 1), t('c', 0, 1), t('c', 1, 2)}
    repeated = Trace([[t('a', 0, 1)], [t('a', 1, 0)], [t('a', 0, 1)]])
    assert transitions_of(Trace([[t('a', 0, 1)], [], [t('a', 0, 1)]])) == {t('a', 0, 1)}
    assert len(transitions_of(repeated)) == 2


def test_post_condition_holds_after_every_playable_step(example, example_initial):
    for state in reachable_states(example, example_initial, 'step'):
        assert apply_step(example, state, []) == state
        for step in playable_steps(example, state):
            result = apply_step(example, state, step)
            assert step_post(step) <= result.locals()
            # 逐个自动机改写状态向量，与同时应用一致
            vector = list(state.assignment)
            for tr in reversed(step.transitions):
                vector[tr.automaton] = tr.destination.index
            assert GlobalState(tuple(vector)) == result


def test_derived_networks(example, t):
    subset = example.with_transitions([t('a', 0, 1)])
    assert subset.automata == example.automata and subset.states == example.states
    assert subset.all_transitions == (t('a', 0, 1),)
    with pytest.raises(NetworkError):
        example.extend('a', [0, 1])
    extended = example.extend('g', [0, 1], [Transition(LocalState(4, 0), LocalState(4, 1), {LocalState(2, 2)})])
    assert extended.automata[-1] == 'g' and len(extended.all_transitions) == 9
    projected = extended.project(example.automata)
    assert projected == example
    with pytest.raises(NetworkError):
        example.project(['a', 'c'])


def test_transition_graph(example, t):
    graph = example.transition_graph(example.automaton_index('c'))
    assert sorted(graph.nodes) == [0, 1, 2]
    assert graph.number_of_edges() == 4
    assert graph.has_edge(0, 2, key=t('c', 0, 2))
