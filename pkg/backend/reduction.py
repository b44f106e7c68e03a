#!/usr/bin/env python3
"""
面向目标的网络约简
从主目标对象出发，迭代收集可能参与到达目标的目标对象集合 B 及其迁移集合 tr(B)，
输出只保留 tr(B) 的约简网络；并支持用额外自动机编码顺序目标
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Optional, Sequence, Set, Tuple

from backend.an_core import GlobalState, LocalState, Network, NetworkError, Transition
from backend.causality import FixpointOracle, LocalCausality, Objective, ValidityOracle

logger = logging.getLogger(__name__)

DEFAULT_GOAL_AUTOMATON = '__goal'

# 两个工作表的处理顺序；结果与顺序无关
SCHEDULES = ('objectives', 'transitions', 'lifo')


@dataclass(frozen=True)
class Goal:
    """可达性目标 g_⊤"""
    target: LocalState

    @property
    def automaton(self) -> int:
        return self.target.automaton


@dataclass(frozen=True)
class ReductionResult:
    goal: Goal
    initial: GlobalState
    filtered: bool
    objectives: FrozenSet[Objective]
    kept: FrozenSet[Transition]
    reduced: Network
    trivially_satisfied: bool
    statically_refuted: bool
    transitions_before: int

    def summary(self) -> Dict[str, Any]:
        """机器可读的摘要"""
        return {
            'transitions_before': self.transitions_before,
            'transitions_after': len(self.kept),
            'objectives': len(self.objectives),
            'filter': self.filtered,
            'trivially_satisfied': self.trivially_satisfied,
            'statically_refuted': self.statically_refuted,
        }


class GoalReducer:
    """B 与 tr(B) 的双工作表构造

    新目标对象 (b_⋆ ⇝ b_i) 加入 B 时：其 tr(rcsol) 中的迁移加入 tr(B)，
    并对 tr(B) 中已有的每个 b_j -> b_k 加入 (b_k ⇝ b_i)。
    新迁移 b_j -> b_k (条件 ℓ) 加入 tr(B) 时：对 ℓ 中每个 a_i 加入 (⟨s⟩_a ⇝ a_i)，
    并对 B 中已有的每个 (b_⋆ ⇝ b_i) 加入 (b_k ⇝ b_i)。
    """

    def __init__(self, network: Network, initial: GlobalState, filter: bool = True,
                 oracle: Optional[ValidityOracle] = None, schedule: str = 'objectives'):
        if schedule not in SCHEDULES:
            raise ValueError(f"Unknown schedule: {schedule}")
        network.check_state(initial)
        self.schedule = schedule
        self.network = network
        self.initial = initial
        self.filter = filter
        if filter:
            self.oracle = oracle if oracle is not None else FixpointOracle(network, initial)
        else:
            self.oracle = None
        self.causality = LocalCausality(network)

        self.objectives: Set[Objective] = set()
        self.kept: Set[Transition] = set()
        self._targets: Dict[int, Set[int]] = {}
        self._destinations: Dict[int, Set[int]] = {}
        self._pending_objectives = deque()
        self._pending_transitions = deque()

    def _add_objective(self, objective: Objective):
        if objective in self.objectives:
            return
        self.objectives.add(objective)
        self._targets.setdefault(objective.automaton, set()).add(objective.target.index)
        self._pending_objectives.append(objective)
        logger.debug(f"B += {self.network.describe(objective.origin)} ⇝ {self.network.describe(objective.target)}")

    def _add_transition(self, t: Transition):
        if t in self.kept:
            return
        self.kept.add(t)
        self._destinations.setdefault(t.automaton, set()).add(t.destination.index)
        self._pending_transitions.append(t)
        logger.debug(f"tr(B) += {self.network.describe_transition(t)}")

    def _process_objective(self, objective: Objective):
        a = objective.automaton
        for t in self.causality.path_transitions(objective, self.oracle):
            self._add_transition(t)
        for k in sorted(self._destinations.get(a, ())):
            self._add_objective(Objective(LocalState(a, k), objective.target))

    def _process_transition(self, t: Transition):
        for c in sorted(t.condition):
            self._add_objective(Objective(self.initial.local(c.automaton), c))
        a = t.automaton
        for i in sorted(self._targets.get(a, ())):
            self._add_objective(Objective(t.destination, LocalState(a, i)))

    def _step(self):
        objectives, transitions = self._pending_objectives, self._pending_transitions
        if self.schedule == 'lifo':
            if objectives:
                self._process_objective(objectives.pop())
            else:
                self._process_transition(transitions.pop())
        elif (self.schedule == 'transitions' and transitions) or not objectives:
            self._process_transition(transitions.popleft())
        else:
            self._process_objective(objectives.popleft())

    def reduce(self, goal: Goal) -> ReductionResult:
        self.network.check_local(goal.target)
        main = Objective(self.initial.local(goal.automaton), goal.target)
        self._add_objective(main)
        while self._pending_objectives or self._pending_transitions:
            self._step()

        trivially = goal.target in self.initial
        refuted = not trivially and not self.causality.has_path(main, self.oracle)
        kept = frozenset(self.kept)
        result = ReductionResult(
            goal=goal,
            initial=self.initial,
            filtered=self.filter,
            objectives=frozenset(self.objectives),
            kept=kept,
            reduced=self.network.with_transitions(kept),
            trivially_satisfied=trivially,
            statically_refuted=refuted,
            transitions_before=len(self.network.all_transitions),
        )
        logger.debug(f"约简完成: |T| {result.transitions_before} -> {len(kept)}, |B|={len(self.objectives)}"
                    f"{', 目标已满足' if trivially else ''}{', 目标被静态否定' if refuted else ''}")
        return result


def reduce(network: Network, initial: GlobalState, goal: Goal, filter: bool = True,
           oracle: Optional[ValidityOracle] = None, schedule: str = 'objectives') -> ReductionResult:
    return GoalReducer(network, initial, filter, oracle, schedule).reduce(goal)


def encode_sequential_goal(network: Network, stages: Sequence[Iterable[LocalState]],
                           name: str = DEFAULT_GOAL_AUTOMATON) -> Tuple[Network, Goal]:
    """顺序目标：新增自动机 g，状态 0..n，第 k 个阶段作为 g_k -> g_{k+1} 的条件，目标为 g_n"""
    stages = [frozenset(stage) for stage in stages]
    if not stages:
        raise NetworkError("Sequential goal needs at least one stage")
    for k, stage in enumerate(stages):
        if not stage:
            raise NetworkError(f"Sequential goal stage {k + 1} is empty")
        for ls in stage:
            network.check_local(ls)

    g = len(network.automata)
    transitions = [Transition(LocalState(g, k), LocalState(g, k + 1), stage)
                   for k, stage in enumerate(stages)]
    extended = network.extend(name, range(len(stages) + 1), transitions)
    return extended, Goal(LocalState(g, len(stages)))


def prune_isolated(result: ReductionResult) -> Network:
    """去掉既没有保留迁移、也不出现在保留迁移条件中、也不是目标所在的自动机"""
    network = result.reduced
    used = {result.goal.automaton}
    for t in result.kept:
        used.add(t.automaton)
        used.update(c.automaton for c in t.condition)
    dropped = [name for a, name in enumerate(network.automata) if a not in used]
    if dropped:
        logger.info(f"删除孤立自动机: {', '.join(dropped)}")
    return network.project(name for a, name in enumerate(network.automata) if a in used)
