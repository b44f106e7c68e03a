import io

import pytest

from backend.an_core import GlobalState, LocalState, Network
from backend.an_format import (ModelParseError, parse_document, parse_goal_spec, parse_model,
                               parse_objective_spec, parse_state_spec, serialize_model)
from backend.oracle import GeneratorParams, random_network


def test_parse_example(example):
    assert len(example.automata) == 4
    assert len(example.all_transitions) == 8
    assert example.states[2] == (0, 1, 2)


def test_parse_accepts_streams_and_bytes(example_text, example):
    assert parse_model(io.StringIO(example_text)) == example
    assert parse_model(example_text.encode('utf-8')) == example


@pytest.mark.parametrize('text, message, line, column', [
    ('', 'no automata declared', 1, 1),
    ('# only a comment\n', 'no automata declared', 1, 1),
    ('"c" [0, 1, 2]\n"c" 0 -> 2 when "c"=1\n', 'condition on own automaton', 2, 17),
    ('"a" [0, 1]\n"b" 0 -> 1\n', 'undeclared automaton "b"', 2, 1),
    ('"a" [0, 1]\n"a" 0 -> 2\n', 'state 2 out of range for "a"', 2, 1),
    ('"a" [0, 1]\n"a" 1 -> 1\n', 'origin equals destination (self-loop)', 2, 1),
    ('"a" [0, 1]\n"b" [0, 1]\n"a" 0 -> 1 when "b"=0 and "b"=1\n', 'duplicate automaton "b" in condition', 3, 27),
    ('"a" [0, 1]\n"a" [0]\n', 'automaton "a" declared twice', 2, 1),
    ('"a" [0, 1]\n"a" 0 => 1\n', "expected '->'", 2, 7),
    ('"a" [0, 1]\n  "a" 0 -> 1 if "b"=0\n', "expected 'when', found 'if'", 2, 16),
    ('"a" [\u0660, \u0661]\n', 'expected a non-negative integer', 1, 6),
    ('"a" [0, 1]\n"a" \u0660 -> 1\n', 'expected a non-negative integer', 2, 5),
])
def test_parse_errors(text, message, line, column):
    with pytest.raises(ModelParseError) as info:
        parse_model(text, 'bad.an')
    error = info.value
    assert error.message.startswith(message)
    assert (error.line, error.column) == (line, column)
    assert str(error).startswith(f"bad.an:{line}:{column}: ")


def test_comments_whitespace_and_quoted_names():
    network = parse_model('"x#1"[0,1]  # state 0 and 1\n\n  "y" [ 0 , 5 ]\n"x#1" 0->1 when "y"=5\n')
    assert network.automata == ('x#1', 'y')
    assert network.states[1] == (0, 5)
    assert network.all_transitions[0].condition == {LocalState(1, 1)}


def test_non_contiguous_labels_are_normalized():
    network = parse_model('"a" [4, 2, 9]\n"a" 9 -> 4\n')
    t = network.all_transitions[0]
    assert (t.origin.index, t.destination.index) == (2, 0)
    assert serialize_model(network) == '"a" [4, 2, 9]\n\n"a" 9 -> 4\n'


def test_duplicate_transitions_are_merged(caplog):
    network = parse_model('"a" [0, 1]\n"a" 0 -> 1\n"a" 0 -> 1\n')
    assert len(network.all_transitions) == 1
    assert '重复的迁移' in caplog.text


def test_document_keeps_source_locations():
    doc = parse_document('"a" [0, 1]\n\n"a" 0 -> 1\n', 'm.an')
    assert doc.locations['a'] == (1, 1)
    assert doc.transitions[0].line == 3


def test_serialize_round_trip(example):
    text = serialize_model(example)
    again = parse_model(text)
    assert again == example
    assert serialize_model(again) == text


def test_serialize_without_transitions():
    network = Network(['a', 'b'], [[0, 1], [0]])
    assert serialize_model(network) == '"a" [0, 1]\n"b" [0]\n'
    assert parse_model(serialize_model(network)) == network


def test_serialize_is_sorted(example):
    lines = serialize_model(example).splitlines()
    assert lines[:4] == ['"a" [0, 1]', '"b" [0, 1]', '"c" [0, 1, 2]', '"d" [0, 1]']
    assert lines[4] == ''
    assert lines[5:] == [
        '"a" 0 -> 1 when "b"=0',
        '"a" 1 -> 0',
        '"b" 0 -> 1 when "a"=1',
        '"b" 1 -> 0 when "a"=0',
        '"c" 0 -> 1 when "a"=1',
        '"c" 0 -> 2 when "d"=1',
        '"c" 1 -> 0 when "b"=1',
        '"c" 1 -> 2 when "b"=0',
    ]


@pytest.mark.parametrize('seed', range(1, 101))
def test_generated_networks_round_trip(seed):
    params = GeneratorParams(automata=(2, 4), states=(2, 3), seed=seed)
    network = random_network(params)
    assert parse_model(serialize_model(network)) == network


def test_parse_state_spec(example):
    assert parse_state_spec('"a"=0,"b"=0,"c"=0,"d"=0', example) == GlobalState((0, 0, 0, 0))
    assert parse_state_spec('', example) == GlobalState((0, 0, 0, 0))
    assert parse_state_spec(' "c" = 2 , "a"=1', example) == GlobalState((1, 0, 2, 0))
    assert parse_state_spec('"c"=2', example, partial=True) == {LocalState(2, 2)}


@pytest.mark.parametrize('text, message', [
    ('"e"=0', 'unknown automaton "e"'),
    ('"c"=3', 'state 3 out of range for "c"'),
    ('"a"=0,"a"=1', 'duplicate assignment of "a"'),
    ('"a"=0;', "expected ','"),
])
def test_parse_state_spec_errors(example, text, message):
    with pytest.raises(ModelParseError) as info:
        parse_state_spec(text, example)
    assert info.value.message.startswith(message)


def test_parse_goal_spec(example, ls):
    assert parse_goal_spec('"c"=2', example) == [{ls('c', 2)}]
    assert parse_goal_spec('"a"=1,"b"=1;"c"=1', example) == [{ls('a', 1), ls('b', 1)}, {ls('c', 1)}]
    with pytest.raises(ModelParseError):
        parse_goal_spec('"c"=2;', example)


def test_parse_objective_spec(example, ls):
    assert parse_objective_spec('"c"=0..2', example) == (ls('c', 0), ls('c', 2))
    with pytest.raises(ModelParseError):
        parse_objective_spec('"c"=0..5', example)
    with pytest.raises(ModelParseError):
        parse_objective_spec('"c"=0', example)
