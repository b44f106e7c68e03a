import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from backend.an_format import parse_model  # noqa: E402

MODELS = os.path.join(ROOT, 'models')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long seed sweeps (run by default)')


@pytest.fixture
def example_path():
    return os.path.join(MODELS, 'example.an')


@pytest.fixture
def example_text(example_path):
    with open(example_path, encoding='utf-8') as f:
        return f.read()


@pytest.fixture
def example(example_text):
    return parse_model(example_text, 'example.an')


@pytest.fixture
def example_initial(example):
    return example.initial_state()


@pytest.fixture
def t(example):
    """按名称与标签取示例网络中唯一的迁移"""
    def lookup(name, origin, destination):
        a = example.automaton_index(name)
        matches = [tr for tr in example.transitions[a]
                   if example.label(tr.origin) == origin and example.label(tr.destination) == destination]
        assert len(matches) == 1
        return matches[0]
    return lookup


@pytest.fixture
def ls(example):
    return example.local
