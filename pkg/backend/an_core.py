#!/usr/bin/env python3
"""
自动机网络核心模型
定义局部状态、局部迁移、网络、全局状态、步与轨迹，以及它们的语义
（可执行性、步的应用、前置/后置条件）
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

logger = logging.getLogger(__name__)


class ANError(Exception):
    """自动机网络相关错误的基类"""


class NetworkError(ANError, ValueError):
    """违反网络结构约束或语义约束"""


@dataclass(frozen=True, order=True)
class LocalState:
    """局部状态 a_i：自动机序号 + 该自动机内的状态序号（均为稠密的小整数）"""
    automaton: int
    index: int


@dataclass(frozen=True)
class Transition:
    """局部迁移 origin -> destination，条件为其他自动机的局部状态集合"""
    origin: LocalState
    destination: LocalState
    condition: FrozenSet[LocalState] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'condition', frozenset(self.condition))
        if self.origin.automaton != self.destination.automaton:
            raise NetworkError(f"Transition crosses automata: {self.origin} -> {self.destination}")
        if self.origin == self.destination:
            raise NetworkError(f"Self-loop transition on {self.origin}")
        seen = set()
        for ls in self.condition:
            if ls.automaton == self.origin.automaton:
                raise NetworkError(f"Condition on own automaton: {ls}")
            if ls.automaton in seen:
                raise NetworkError(f"Duplicate automaton {ls.automaton} in condition")
            seen.add(ls.automaton)

    @property
    def automaton(self) -> int:
        return self.origin.automaton

    @property
    def pre(self) -> FrozenSet[LocalState]:
        """•t = {origin} ∪ condition"""
        return self.condition | {self.origin}

    @property
    def post(self) -> FrozenSet[LocalState]:
        """t• = {destination} ∪ condition"""
        return self.condition | {self.destination}

    def sort_key(self) -> Tuple:
        return (self.origin.automaton, self.origin.index, self.destination.index,
                tuple(sorted(self.condition)))


def sort_transitions(transitions: Iterable[Transition]) -> List[Transition]:
    return sorted(transitions, key=Transition.sort_key)


@dataclass(frozen=True)
class GlobalState:
    """全局状态：按网络自动机顺序给出每个自动机的状态序号"""
    assignment: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'assignment', tuple(self.assignment))

    def __contains__(self, ls: LocalState) -> bool:
        return 0 <= ls.automaton < len(self.assignment) and self.assignment[ls.automaton] == ls.index

    def __len__(self) -> int:
        return len(self.assignment)

    def local(self, automaton: int) -> LocalState:
        return LocalState(automaton, self.assignment[automaton])

    def locals(self) -> FrozenSet[LocalState]:
        return frozenset(LocalState(a, i) for a, i in enumerate(self.assignment))

    def contains_all(self, states: Iterable[LocalState]) -> bool:
        return all(ls in self for ls in states)

    def update(self, states: Iterable[LocalState]) -> 'GlobalState':
        assignment = list(self.assignment)
        for ls in states:
            assignment[ls.automaton] = ls.index
        return GlobalState(tuple(assignment))


@dataclass(frozen=True)
class Step:
    """步：迁移集合，每个自动机至多一个迁移，且前置条件的并不冲突

    迁移按自动机序号排序保存，因此步与轨迹的相等是结构相等。
    """
    transitions: Tuple[Transition, ...] = ()

    def __post_init__(self):
        ordered = tuple(sort_transitions(self.transitions))
        owners = set()
        required: Dict[int, int] = {}
        for t in ordered:
            if t.automaton in owners:
                raise NetworkError(f"Step has two transitions of automaton {t.automaton}")
            owners.add(t.automaton)
            for ls in t.pre:
                if required.setdefault(ls.automaton, ls.index) != ls.index:
                    raise NetworkError(
                        f"Step pre-conditions assign two states to automaton {ls.automaton}")
        object.__setattr__(self, 'transitions', ordered)

    def __iter__(self):
        return iter(self.transitions)

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def pre(self) -> FrozenSet[LocalState]:
        result = set()
        for t in self.transitions:
            result |= t.pre
        return frozenset(result)

    @property
    def post(self) -> FrozenSet[LocalState]:
        result = set()
        for t in self.transitions:
            result |= t.post
        return frozenset(result - {t.origin for t in self.transitions})


@dataclass(frozen=True)
class Trace:
    """轨迹：步的序列（允许空步）"""
    steps: Tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(
            s if isinstance(s, Step) else Step(tuple(s)) for s in self.steps))

    def __iter__(self):
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, item):
        return self.steps[item]


@dataclass(frozen=True)
class TraceCheck:
    """轨迹校验结果；failed_step 为首个不可执行步的序号（从 1 开始）"""
    valid: bool
    failed_step: Optional[int] = None

    def __bool__(self) -> bool:
        return self.valid


class Network:
    """自动机网络 (Σ, S, T)，构造后不可变"""

    def __init__(self, automata: Sequence[str], states: Sequence[Sequence[int]],
                 transitions: Iterable[Transition] = ()):
        self.automata: Tuple[str, ...] = tuple(automata)
        self.states: Tuple[Tuple[int, ...], ...] = tuple(tuple(labels) for labels in states)
        if not self.automata:
            raise NetworkError("no automata declared")
        if len(self.states) != len(self.automata):
            raise NetworkError("states must be given for every automaton")

        self._index: Dict[str, int] = {}
        for a, name in enumerate(self.automata):
            if not name or '"' in name or '\n' in name:
                raise NetworkError(f"Invalid automaton name: {name!r}")
            if name in self._index:
                raise NetworkError(f"Duplicate automaton: {name}")
            self._index[name] = a
            labels = self.states[a]
            if not labels:
                raise NetworkError(f"Automaton {name} has no local state")
            if len(set(labels)) != len(labels) or any(label < 0 for label in labels):
                raise NetworkError(f"Invalid state labels for {name}: {list(labels)}")

        grouped: List[set] = [set() for _ in self.automata]
        for t in transitions:
            for ls in t.pre | t.post:
                self.check_local(ls)
            grouped[t.automaton].add(t)
        self.transitions: Tuple[Tuple[Transition, ...], ...] = tuple(
            tuple(sort_transitions(ts)) for ts in grouped)
        self.all_transitions: Tuple[Transition, ...] = tuple(
            t for ts in self.transitions for t in ts)
        self.transition_set: FrozenSet[Transition] = frozenset(self.all_transitions)
        self._graphs: Dict[int, nx.MultiDiGraph] = {}

    @classmethod
    def build(cls, declarations: Mapping[str, Sequence[int]],
              transitions: Iterable[Tuple[str, int, int, Mapping[str, int]]] = ()) -> 'Network':
        """按名称与声明的状态标签构造网络，例如
        Network.build({'a': [0, 1], 'b': [0, 1]}, [('a', 0, 1, {'b': 0})])
        """
        skeleton = cls(list(declarations), [list(v) for v in declarations.values()])
        built = []
        for name, origin, destination, condition in transitions:
            built.append(Transition(
                skeleton.local(name, origin),
                skeleton.local(name, destination),
                frozenset(skeleton.local(n, label) for n, label in dict(condition).items())))
        return skeleton.with_transitions(built)

    def __repr__(self) -> str:
        return f"Network(automata={len(self.automata)}, transitions={len(self.all_transitions)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (self.automata == other.automata and self.states == other.states
                and self.transition_set == other.transition_set)

    def __hash__(self) -> int:
        return hash((self.automata, self.states, self.transition_set))

    # 名称与标签
    def automaton_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise NetworkError(f"Unknown automaton: {name}") from None

    def local(self, name: str, label: int) -> LocalState:
        a = self.automaton_index(name)
        try:
            return LocalState(a, self.states[a].index(label))
        except ValueError:
            raise NetworkError(f"Automaton {name} has no state {label}") from None

    def label(self, ls: LocalState) -> int:
        self.check_local(ls)
        return self.states[ls.automaton][ls.index]

    def describe(self, ls: LocalState) -> str:
        return f'"{self.automata[ls.automaton]}"={self.label(ls)}'

    def describe_transition(self, t: Transition) -> str:
        line = f'"{self.automata[t.automaton]}" {self.label(t.origin)} -> {self.label(t.destination)}'
        if t.condition:
            line += ' when ' + ' and '.join(self.describe(ls) for ls in sorted(t.condition))
        return line

    def state_count(self, automaton: int) -> int:
        return len(self.states[automaton])

    def product_size(self) -> int:
        return math.prod(len(labels) for labels in self.states)

    # 校验
    def check_local(self, ls: LocalState):
        if not (0 <= ls.automaton < len(self.automata)
                and 0 <= ls.index < len(self.states[ls.automaton])):
            raise NetworkError(f"Local state {ls} does not belong to the network")

    def check_state(self, state: GlobalState):
        if len(state.assignment) != len(self.automata):
            raise NetworkError("Global state does not match the network automata")
        for a, i in enumerate(state.assignment):
            self.check_local(LocalState(a, i))

    def check_transition(self, t: Transition):
        if t not in self.transition_set:
            raise NetworkError(f"Transition {t} does not belong to the network")

    # 构造派生网络
    def initial_state(self, assignment: Optional[Iterable[LocalState]] = None) -> GlobalState:
        """未指定的自动机处于其首个声明状态"""
        state = GlobalState(tuple(0 for _ in self.automata))
        if assignment:
            assignment = list(assignment)
            for ls in assignment:
                self.check_local(ls)
            state = state.update(assignment)
        return state

    def with_transitions(self, transitions: Iterable[Transition]) -> 'Network':
        """同样的自动机与局部状态，替换迁移集合"""
        return Network(self.automata, self.states, transitions)

    def extend(self, name: str, labels: Sequence[int],
               transitions: Iterable[Transition] = ()) -> 'Network':
        """追加一个新自动机（序号为当前自动机个数），已有局部状态的序号不变"""
        if name in self._index:
            raise NetworkError(f"Automaton name collision: {name}")
        return Network(self.automata + (name,), self.states + (tuple(labels),),
                       self.all_transitions + tuple(transitions))

    def project(self, names: Iterable[str]) -> 'Network':
        """只保留给定自动机，保持声明顺序；迁移及其条件必须不引用被删除的自动机"""
        keep = set(names)
        kept_order = [a for a, name in enumerate(self.automata) if name in keep]
        remap = {old: new for new, old in enumerate(kept_order)}

        def move(ls: LocalState) -> LocalState:
            if ls.automaton not in remap:
                raise NetworkError(f"Cannot drop automaton {self.automata[ls.automaton]}: still referenced")
            return LocalState(remap[ls.automaton], ls.index)

        transitions = [Transition(move(t.origin), move(t.destination), frozenset(move(c) for c in t.condition))
                       for t in self.all_transitions if t.automaton in remap]
        return Network([self.automata[a] for a in kept_order],
                       [self.states[a] for a in kept_order], transitions)

    def transition_graph(self, automaton: int) -> nx.MultiDiGraph:
        """一个自动机的局部迁移图：节点为状态序号，边的 key 为迁移本身"""
        if automaton not in self._graphs:
            graph = nx.MultiDiGraph()
            graph.add_nodes_from(range(self.state_count(automaton)))
            for t in self.transitions[automaton]:
                graph.add_edge(t.origin.index, t.destination.index, key=t)
            self._graphs[automaton] = graph
        return self._graphs[automaton]


def _exclusive(step: Union[Step, Iterable[Transition]]) -> Tuple[Transition, ...]:
    """只检查每个自动机至多一个迁移（前置条件可以冲突）"""
    if isinstance(step, Step):
        return step.transitions
    transitions = tuple(step)
    owners = [t.automaton for t in transitions]
    if len(set(owners)) != len(owners):
        raise NetworkError("Step has two transitions of one automaton")
    return transitions


def step_pre(step: Union[Step, Iterable[Transition]]) -> FrozenSet[LocalState]:
    """•τ：各迁移前置条件的并"""
    return frozenset(ls for t in _exclusive(step) for ls in t.pre)


def step_post(step: Union[Step, Iterable[Transition]]) -> FrozenSet[LocalState]:
    """τ•：各迁移后置条件的并，去掉各迁移的起点"""
    transitions = _exclusive(step)
    post = {ls for t in transitions for ls in t.post}
    return frozenset(post - {t.origin for t in transitions})


def playable(network: Network, state: GlobalState, step: Union[Step, Iterable[Transition]]) -> bool:
    transitions = _exclusive(step)
    network.check_state(state)
    for t in transitions:
        network.check_transition(t)
    return state.contains_all(step_pre(transitions))


def apply_step(network: Network, state: GlobalState, step: Union[Step, Iterable[Transition]]) -> GlobalState:
    """s·τ：有迁移的自动机移动到迁移终点，其余不变"""
    transitions = _exclusive(step)
    if not playable(network, state, transitions):
        raise NetworkError("Step is not playable in the given state")
    return state.update(t.destination for t in transitions)


def validate_trace(network: Network, start: GlobalState, trace: Trace) -> TraceCheck:
    network.check_state(start)
    state = start
    for n, step in enumerate(trace, start=1):
        for t in step:
            network.check_transition(t)
        if not state.contains_all(step.pre):
            logger.debug(f"轨迹在第 {n} 步不可执行")
            return TraceCheck(False, n)
        state = state.update(t.destination for t in step)
    return TraceCheck(True)


def apply_trace(network: Network, start: GlobalState, trace: Trace) -> GlobalState:
    state = start
    for step in trace:
        state = apply_step(network, state, step)
    return state


def trace_pre(trace: Trace) -> FrozenSet[LocalState]:
    """•π：每个自动机第一次被涉及时所要求的局部状态"""
    result = set()
    touched = set()
    for step in trace:
        pre = step.pre
        result |= {ls for ls in pre if ls.automaton not in touched}
        touched |= {ls.automaton for ls in pre}
    return frozenset(result)


def trace_post(trace: Trace) -> FrozenSet[LocalState]:
    """π•：每个自动机最后一次被涉及后所处的局部状态（之后的步不再涉及该自动机）"""
    result = set()
    touched = set()
    for step in reversed(trace.steps):
        post = step.post
        result |= {ls for ls in post if ls.automaton not in touched}
        touched |= {ls.automaton for ls in post}
    return frozenset(result)


def transitions_of(trace: Trace) -> FrozenSet[Transition]:
    """tr(π)：轨迹中出现的全部迁移"""
    return frozenset(t for step in trace for t in step)
