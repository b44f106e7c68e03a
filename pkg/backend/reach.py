#!/usr/bin/env python3
"""
显式状态可达性引擎
在异步语义（每步一个迁移）与一般步语义下做广度优先搜索：目标可达性与最短见证、
可达状态计数，以及通过剪枝可达性验证切割集
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from backend.an_core import ANError, GlobalState, LocalState, Network, NetworkError, Step, Trace, Transition

logger = logging.getLogger(__name__)

ASYNC = 'async'
STEP = 'step'
SEMANTICS = (ASYNC, STEP)

DEFAULT_MAX_STATES = 10 ** 7
DEFAULT_MAX_STEPS = 10 ** 6

# Goal、单个局部状态或局部状态集合
GoalSpec = Union[LocalState, Iterable[LocalState]]


class LimitExceeded(ANError):
    """搜索达到状态数或步数上限，结论不确定"""


@dataclass(frozen=True)
class Limits:
    max_states: int = DEFAULT_MAX_STATES
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.max_states <= 0 or self.max_steps <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class ReachResult:
    """reachable 为 None 表示达到上限、结论不确定（区别于不可达）"""
    reachable: Optional[bool]
    witness: Optional[Trace]
    states_explored: int
    frontier_peak: int

    @property
    def inconclusive(self) -> bool:
        return self.reachable is None

    @property
    def verdict(self) -> str:
        if self.reachable is None:
            return 'inconclusive'
        return 'reachable' if self.reachable else 'unreachable'


def goal_states(goal) -> FrozenSet[LocalState]:
    """目标可以是 Goal、单个局部状态或局部状态集合（部分赋值）"""
    target = getattr(goal, 'target', goal)
    if isinstance(target, LocalState):
        return frozenset([target])
    return frozenset(target)


class ReachabilityEngine:
    """在打包的状态向量（状态序号元组）上做搜索"""

    def __init__(self, network: Network, semantics: str = ASYNC):
        if semantics not in SEMANTICS:
            raise ValueError(f"Unknown semantics: {semantics}")
        self.network = network
        self.semantics = semantics
        # 每个自动机、每个起点状态上的迁移，附带条件的 (自动机, 状态) 对
        self._by_origin: List[List[List[Tuple[Transition, Tuple[Tuple[int, int], ...]]]]] = []
        for a in range(len(network.automata)):
            table = [[] for _ in range(network.state_count(a))]
            for t in network.transitions[a]:
                table[t.origin.index].append(
                    (t, tuple((c.automaton, c.index) for c in sorted(t.condition))))
            self._by_origin.append(table)

    def enabled(self, state: Tuple[int, ...]) -> List[List[Transition]]:
        """按自动机分组的可触发迁移"""
        groups = []
        for a, table in enumerate(self._by_origin):
            ready = [t for t, cond in table[state[a]] if all(state[b] == i for b, i in cond)]
            if ready:
                groups.append(ready)
        return groups

    def successors(self, state: Tuple[int, ...]) -> Iterator[Tuple[Tuple[Transition, ...], Tuple[int, ...]]]:
        groups = self.enabled(state)
        if self.semantics == ASYNC:
            choices = ((t,) for group in groups for t in group)
        else:
            # 同一状态下可触发的迁移前置条件必然相容，任意每自动机至多一个的组合都是可执行步
            choices = (tuple(t for t in combo if t is not None)
                       for combo in product(*[[None] + group for group in groups]))
        for transitions in choices:
            if not transitions:
                continue
            succ = list(state)
            for t in transitions:
                succ[t.automaton] = t.destination.index
            yield transitions, tuple(succ)

    def search(self, initial: GlobalState, goal: Optional[FrozenSet[LocalState]] = None,
               limits: Limits = Limits(), witness: bool = True):
        """广度优先搜索；返回 (ReachResult, 已访问状态集合)

        goal 为 None 时遍历全部可达状态。
        """
        self.network.check_state(initial)
        targets = tuple((ls.automaton, ls.index) for ls in sorted(goal)) if goal is not None else None

        def satisfied(state):
            return targets is not None and all(state[a] == i for a, i in targets)

        start = initial.assignment
        parents: Dict[Tuple[int, ...], Optional[Tuple]] = {start: None}
        visited = parents if witness else {start}
        if satisfied(start):
            return ReachResult(True, Trace(()) if witness else None, 1, 1), visited

        layer = [start]
        peak = 1
        depth = 0
        while layer:
            if depth >= limits.max_steps:
                logger.warning(f"达到步数上限 {limits.max_steps}，结论不确定")
                return ReachResult(None, None, len(visited), peak), visited
            following = []
            for state in layer:
                for transitions, succ in self.successors(state):
                    if succ in visited:
                        continue
                    if witness:
                        parents[succ] = (state, transitions)
                    else:
                        visited.add(succ)
                    if len(visited) > limits.max_states:
                        logger.warning(f"达到状态数上限 {limits.max_states}，结论不确定")
                        return ReachResult(None, None, len(visited), peak), visited
                    if satisfied(succ):
                        trace = self._witness(parents, succ) if witness else None
                        return ReachResult(True, trace, len(visited), max(peak, len(following) + 1)), visited
                    following.append(succ)
            depth += 1
            peak = max(peak, len(following))
            logger.debug(f"BFS 第 {depth} 层: {len(following)} 个新状态")
            layer = following
        return ReachResult(False, None, len(visited), peak), visited

    @staticmethod
    def _witness(parents, state) -> Trace:
        steps = []
        while parents[state] is not None:
            state, transitions = parents[state]
            steps.append(Step(transitions))
        return Trace(tuple(reversed(steps)))


def playable_steps(network: Network, state: GlobalState) -> List[Step]:
    """一般步语义下的全部非空可执行步"""
    engine = ReachabilityEngine(network, STEP)
    return [Step(transitions) for transitions, _ in engine.successors(state.assignment)]


def reachable(network: Network, initial: GlobalState, goal: GoalSpec, semantics: str = ASYNC,
              limits: Limits = Limits(), witness: bool = True) -> ReachResult:
    """目标（局部状态或部分赋值）是否可达；达到上限时给出不确定结论而不是不可达"""
    targets = goal_states(goal)
    for ls in targets:
        network.check_local(ls)
    result, _ = ReachabilityEngine(network, semantics).search(initial, targets, limits, witness)
    logger.debug(f"可达性({semantics}): {result.verdict}, 探索 {result.states_explored} 个状态")
    return result


def reachable_states(network: Network, initial: GlobalState, semantics: str = ASYNC,
                     limits: Limits = Limits()) -> FrozenSet[GlobalState]:
    result, visited = ReachabilityEngine(network, semantics).search(initial, None, limits, witness=False)
    if result.inconclusive:
        raise LimitExceeded(f"more than {limits.max_states} reachable states")
    return frozenset(GlobalState(s) for s in visited)


def count_states(network: Network, initial: GlobalState, limits: Limits = Limits(),
                 semantics: str = ASYNC) -> Optional[int]:
    """可达全局状态数；达到上限时返回 None"""
    try:
        count = len(reachable_states(network, initial, semantics, limits))
    except LimitExceeded as e:
        logger.warning(f"状态计数不确定: {e}")
        return None
    logger.debug(f"可达状态数: {count}")
    return count


def verify_cut_set(network: Network, initial: GlobalState, goal: GoalSpec, cut: Iterable[LocalState],
                   semantics: str = ASYNC, limits: Limits = Limits()) -> bool:
    """删去所有终点在切割集中的迁移后目标不可达，则切割集成立"""
    cut = frozenset(cut)
    targets = goal_states(goal)
    for ls in cut | targets:
        network.check_local(ls)
    if any(ls in initial for ls in cut):
        raise NetworkError("cut set must be disjoint from the initial state")
    if cut & targets:
        raise NetworkError("goal must not belong to the cut set")

    pruned = network.with_transitions(t for t in network.all_transitions if t.destination not in cut)
    logger.debug(f"切割集剪枝: |T| {len(network.all_transitions)} -> {len(pruned.all_transitions)}")
    result = reachable(pruned, initial, targets, semantics, limits, witness=False)
    if result.inconclusive:
        raise LimitExceeded("cut set verification hit the search limits")
    return not result.reachable
