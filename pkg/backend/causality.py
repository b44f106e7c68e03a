#!/usr/bin/env python3
"""
局部因果分析
目标对象 (objective)、自动机内的无环局部路径枚举，以及对目标对象可实现性的
可靠上近似 valid_s（最小不动点）
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from backend.an_core import GlobalState, LocalState, Network, NetworkError, Transition

logger = logging.getLogger(__name__)

LocalPath = Tuple[Transition, ...]


@dataclass(frozen=True, order=True)
class Objective:
    """目标对象 a_i ⇝ a_j（允许 a_i = a_j）"""
    origin: LocalState
    target: LocalState

    def __post_init__(self):
        if self.origin.automaton != self.target.automaton:
            raise NetworkError(f"Objective crosses automata: {self.origin} ⇝ {self.target}")

    @property
    def automaton(self) -> int:
        return self.origin.automaton

    @property
    def reflexive(self) -> bool:
        return self.origin == self.target


def path_key(path: LocalPath) -> Tuple:
    return tuple(t.sort_key() for t in path)


def all_objectives(network: Network) -> Iterator[Objective]:
    for a in range(len(network.automata)):
        n = network.state_count(a)
        for i in range(n):
            for j in range(n):
                yield Objective(LocalState(a, i), LocalState(a, j))


class ValidityOracle:
    """valid_s 的接口：返回 False 时保证不存在从初始状态实现该目标对象的轨迹"""

    def __init__(self, initial: GlobalState):
        self.initial = initial

    def is_valid(self, objective: Objective) -> bool:
        raise NotImplementedError

    def allows(self, t: Transition) -> bool:
        """迁移的每个条件 b_k 都满足 valid_s(⟨s⟩_b ⇝ b_k)"""
        return all(self.is_valid(Objective(self.initial.local(c.automaton), c)) for c in t.condition)


class TrivialOracle(ValidityOracle):
    """valid_s ≡ true，即不做不可能目标的过滤"""

    def is_valid(self, objective: Objective) -> bool:
        return True


class FixpointOracle(ValidityOracle):
    """最小不动点 Ω 的实现

    从初始局部状态出发用工作表计算可达局部状态集 R：条件全部在 R 中的迁移视为可用，
    其起点在 R 中则终点进入 R。Ω 即各自动机在可用迁移图上的可达关系。
    """

    def __init__(self, network: Network, initial: GlobalState, order: Optional[Sequence[int]] = None):
        super().__init__(initial)
        network.check_state(initial)
        self.network = network
        self.reached = self._reach_locals(order)
        self.enabled: FrozenSet[Transition] = frozenset(
            t for t in network.all_transitions if t.condition <= self.reached)
        self.valid: FrozenSet[Objective] = self._collect()
        logger.debug(f"valid_s 不动点: |R|={len(self.reached)}, |Ω|={len(self.valid)}")

    def _reach_locals(self, order: Optional[Sequence[int]]) -> FrozenSet[LocalState]:
        network = self.network
        automata = list(order) if order is not None else list(range(len(network.automata)))
        if sorted(automata) != list(range(len(network.automata))):
            raise NetworkError("order must be a permutation of the automata")

        by_origin: Dict[LocalState, List[Transition]] = {}
        watchers: Dict[LocalState, List[Transition]] = {}
        for t in network.all_transitions:
            by_origin.setdefault(t.origin, []).append(t)
            for c in t.condition:
                watchers.setdefault(c, []).append(t)

        reached: Set[LocalState] = set()
        pending = deque()

        def enter(ls: LocalState):
            if ls not in reached:
                reached.add(ls)
                pending.append(ls)

        for a in automata:
            enter(self.initial.local(a))
        while pending:
            ls = pending.popleft()
            for t in by_origin.get(ls, ()):
                if t.condition <= reached:
                    enter(t.destination)
            for t in watchers.get(ls, ()):
                if t.origin in reached and t.condition <= reached:
                    enter(t.destination)
        return frozenset(reached)

    def _collect(self) -> FrozenSet[Objective]:
        valid = set()
        for a in range(len(self.network.automata)):
            graph = nx.DiGraph()
            graph.add_nodes_from(range(self.network.state_count(a)))
            graph.add_edges_from((t.origin.index, t.destination.index)
                                 for t in self.network.transitions[a] if t in self.enabled)
            for i in graph.nodes:
                for j in nx.descendants(graph, i) | {i}:
                    valid.add(Objective(LocalState(a, i), LocalState(a, j)))
        return frozenset(valid)

    def is_valid(self, objective: Objective) -> bool:
        return objective in self.valid

    def allows(self, t: Transition) -> bool:
        return t in self.enabled


class LocalCausality:
    """一个网络上的局部路径分析，按目标对象缓存结果"""

    def __init__(self, network: Network):
        self.network = network
        self._paths: Dict[Objective, Tuple[LocalPath, ...]] = {}
        self._transitions: Dict[Tuple[Objective, Optional[ValidityOracle]], FrozenSet[Transition]] = {}

    def iter_paths(self, objective: Objective,
                   oracle: Optional[ValidityOracle] = None) -> Iterator[LocalPath]:
        """深度优先枚举无环局部路径（终点不会等于路径上任何更早迁移的起点）

        给定 oracle 时只沿条件均有效的迁移搜索，结果即 rcsol_s。
        """
        self.network.check_local(objective.origin)
        self.network.check_local(objective.target)
        if objective.reflexive:
            yield ()
            return
        graph = self.network.transition_graph(objective.automaton)
        if oracle is not None:
            graph = nx.subgraph_view(graph, filter_edge=lambda u, v, t: oracle.allows(t))
        for edges in nx.all_simple_edge_paths(graph, objective.origin.index, objective.target.index):
            yield tuple(t for _, _, t in edges)

    def local_paths(self, objective: Objective) -> Tuple[LocalPath, ...]:
        if objective not in self._paths:
            self._paths[objective] = tuple(sorted(self.iter_paths(objective), key=path_key))
        return self._paths[objective]

    def filtered_paths(self, objective: Objective,
                       oracle: Optional[ValidityOracle]) -> Tuple[LocalPath, ...]:
        if oracle is None:
            return self.local_paths(objective)
        return tuple(sorted(self.iter_paths(objective, oracle), key=path_key))

    def path_transitions(self, objective: Objective,
                         oracle: Optional[ValidityOracle]) -> FrozenSet[Transition]:
        """tr(rcsol_s(P))：只累积迁移集合，不保存路径本身"""
        key = (objective, oracle)
        if key not in self._transitions:
            collected: Set[Transition] = set()
            for path in self.iter_paths(objective, oracle):
                collected.update(path)
            self._transitions[key] = frozenset(collected)
        return self._transitions[key]

    def has_path(self, objective: Objective, oracle: Optional[ValidityOracle]) -> bool:
        return next(self.iter_paths(objective, oracle), None) is not None


def local_paths(network: Network, objective: Objective) -> Tuple[LocalPath, ...]:
    """local-paths(a_i ⇝ a_j)，按迁移字典序排列"""
    return LocalCausality(network).local_paths(objective)


def compute_valid(network: Network, initial: GlobalState,
                  order: Optional[Sequence[int]] = None) -> FixpointOracle:
    return FixpointOracle(network, initial, order)


def is_valid(oracle: ValidityOracle, objective: Objective) -> bool:
    return oracle.is_valid(objective)


def filtered_local_paths(network: Network, oracle: Optional[ValidityOracle],
                         objective: Objective) -> Tuple[LocalPath, ...]:
    """rcsol_s(P)；oracle 为 None 时等同于 local_paths"""
    return LocalCausality(network).filtered_paths(objective, oracle)


def apply_f(network: Network, initial: GlobalState, omega: Iterable[Objective]) -> FrozenSet[Objective]:
    """F(Ω)：存在一条局部路径，其所有条件 b_k 满足 (⟨s⟩_b ⇝ b_k) ∈ Ω"""
    omega = frozenset(omega)
    causality = LocalCausality(network)
    result = set()
    for objective in all_objectives(network):
        for path in causality.local_paths(objective):
            if all(Objective(initial.local(c.automaton), c) in omega for t in path for c in t.condition):
                result.add(objective)
                break
    return frozenset(result)


def kleene_valid(network: Network, initial: GlobalState) -> FrozenSet[Objective]:
    """朴素 Kleene 迭代，从空集开始直到稳定"""
    omega: FrozenSet[Objective] = frozenset()
    while True:
        following = apply_f(network, initial, omega)
        if following == omega:
            return omega
        omega = following
