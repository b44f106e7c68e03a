#!/usr/bin/env python3
"""
穷举基准（用于性质测试）
最小轨迹判定、最小轨迹穷举、随机网络生成、E[¬C U g] 的显式求值，
以及把这些基准与约简/可达性结果逐一对照的种子扫描
"""

import logging
import random
import string
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from backend.an_core import (ANError, GlobalState, LocalState, Network, Step, Trace, Transition, apply_trace,
                             transitions_of, validate_trace)
from backend.causality import all_objectives, apply_f, compute_valid, kleene_valid
from backend.reach import (ASYNC, STEP, SEMANTICS, LimitExceeded, Limits, ReachabilityEngine,
                           goal_states, reachable, reachable_states, verify_cut_set)
from backend.reduction import Goal, SCHEDULES, reduce

logger = logging.getLogger(__name__)

READINGS = ('transitions', 'strict')
DEFAULT_ENUMERATION_BUDGET = 200_000
SWEEP_MAX_LEN = {ASYNC: 6, STEP: 3}
SWEEP_LIMITS = Limits(max_states=10 ** 5, max_steps=10 ** 3)


class OracleError(ANError, ValueError):
    """基准的输入不合法"""


@dataclass(frozen=True)
class GeneratorParams:
    """随机网络参数，区间均为闭区间 (最小, 最大)"""
    automata: Tuple[int, int] = (2, 4)
    states: Tuple[int, int] = (2, 3)
    transitions: Tuple[int, int] = (1, 5)
    condition_size: Tuple[int, int] = (0, 2)
    seed: int = 1

    def validate(self):
        for name in ('automata', 'states', 'transitions', 'condition_size'):
            low, high = getattr(self, name)
            if low < 0 or low > high:
                raise OracleError(f"empty range for {name}: {(low, high)}")
        if self.automata[0] < 1 or self.states[0] < 1:
            raise OracleError("need at least one automaton with one state")
        if self.transitions[0] > self.states[0] * (self.states[0] - 1):
            raise OracleError(f"{self.transitions[0]} transitions cannot fit in an automaton of "
                              f"{self.states[0]} states")
        if self.condition_size[0] > self.automata[0] - 1:
            raise OracleError("conditions larger than the number of other automata")

    def with_seed(self, seed: int) -> 'GeneratorParams':
        return GeneratorParams(self.automata, self.states, self.transitions, self.condition_size, seed)


SWEEP_PARAMS = GeneratorParams(automata=(2, 4), states=(2, 3), transitions=(1, 5), condition_size=(0, 2))


def _names(count: int) -> List[str]:
    if count <= len(string.ascii_lowercase):
        return list(string.ascii_lowercase[:count])
    return [f"v{i}" for i in range(count)]


def _generate(params: GeneratorParams, rng: random.Random) -> Network:
    params.validate()
    count = rng.randint(*params.automata)
    names = _names(count)
    sizes = [rng.randint(*params.states) for _ in names]
    skeleton = Network(names, [list(range(n)) for n in sizes])

    transitions = []
    for a, n in enumerate(sizes):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        k = rng.randint(params.transitions[0], min(params.transitions[1], len(pairs)))
        others = [b for b in range(count) if b != a]
        for i, j in rng.sample(pairs, k):
            size = rng.randint(params.condition_size[0], min(params.condition_size[1], len(others)))
            condition = frozenset(LocalState(b, rng.randrange(sizes[b])) for b in rng.sample(others, size))
            transitions.append(Transition(LocalState(a, i), LocalState(a, j), condition))
    return skeleton.with_transitions(transitions)


def random_network(params: GeneratorParams) -> Network:
    """对固定种子是确定的"""
    return _generate(params, random.Random(params.seed))


def random_instance(params: GeneratorParams) -> Tuple[Network, GlobalState, Goal]:
    """随机网络 + 随机初始状态 + 随机目标；目标局部状态不在初始状态中（除非该自动机只有一个状态）"""
    rng = random.Random(params.seed)
    network = _generate(params, rng)
    initial = GlobalState(tuple(rng.randrange(len(labels)) for labels in network.states))
    g = rng.randrange(len(network.automata))
    others = [i for i in range(network.state_count(g)) if i != initial.assignment[g]]
    return network, initial, Goal(LocalState(g, rng.choice(others) if others else initial.assignment[g]))


def _subsets(step: Step) -> Iterable[Tuple[Transition, ...]]:
    for size in range(len(step), -1, -1):
        yield from combinations(step.transitions, size)


def is_minimal(network: Network, initial: GlobalState, goal, trace: Trace,
               reading: str = 'transitions') -> bool:
    """判断轨迹对目标是否最小

    在 trace 中按序选取各步的子集（空子集即跳过该步），若存在一个仍然有效、到达目标、
    且与 trace 不同的选取，则 trace 不是最小的。reading='transitions' 时"不同"指至少少了
    一个迁移；reading='strict' 时任何结构上的不同都算（例如去掉一个空步）。
    """
    if reading not in READINGS:
        raise OracleError(f"Unknown reading: {reading}")
    targets = goal_states(goal)
    check = validate_trace(network, initial, trace)
    if not check:
        raise OracleError(f"trace is not valid (step {check.failed_step})")
    if not apply_trace(network, initial, trace).contains_all(targets):
        raise OracleError("trace does not reach the goal")

    steps = trace.steps
    remaining = [0] * (len(steps) + 1)
    for j in range(len(steps) - 1, -1, -1):
        remaining[j] = remaining[j + 1] + len(steps[j])
    wanted = tuple((ls.automaton, ls.index) for ls in targets)

    @lru_cache(maxsize=None)
    def witness_from(j: int, state: Tuple[int, ...], dropped: bool) -> bool:
        if all(state[a] == i for a, i in wanted) and (dropped or remaining[j] > 0):
            return True
        if j == len(steps):
            return False
        for subset in _subsets(steps[j]):
            if not all(state[c.automaton] == c.index for t in subset for c in t.pre):
                continue
            succ = list(state)
            for t in subset:
                succ[t.automaton] = t.destination.index
            if witness_from(j + 1, tuple(succ), dropped or len(subset) < len(steps[j])):
                return True
        return False

    minimal = not witness_from(0, initial.assignment, False)
    if reading == 'strict' and any(len(step) == 0 for step in steps):
        return False
    return minimal


def minimality_readings(network: Network, initial: GlobalState, goal, trace: Trace) -> Dict[str, bool]:
    return {reading: is_minimal(network, initial, goal, trace, reading) for reading in READINGS}


def enumerate_minimal_traces(network: Network, initial: GlobalState, goal, max_len: int,
                             semantics: str = STEP,
                             budget: int = DEFAULT_ENUMERATION_BUDGET) -> Tuple[Trace, ...]:
    """穷举长度不超过 max_len 的最小轨迹，顺序确定

    最小轨迹在首次到达目标时结束，且不会重复经过同一全局状态，深度优先搜索据此剪枝。
    超出预算时抛出 LimitExceeded。
    """
    if max_len < 0:
        raise OracleError("max_len must be non-negative")
    targets = goal_states(goal)
    for ls in targets:
        network.check_local(ls)
    network.check_state(initial)
    wanted = tuple((ls.automaton, ls.index) for ls in targets)
    engine = ReachabilityEngine(network, semantics)

    candidates: List[Trace] = []
    path: List[Tuple[Transition, ...]] = []
    on_path: Set[Tuple[int, ...]] = set()
    explored = 0

    def visit(state: Tuple[int, ...]):
        nonlocal explored
        explored += 1
        if explored > budget:
            raise LimitExceeded(f"minimal trace enumeration exceeded {budget} nodes")
        if all(state[a] == i for a, i in wanted):
            candidates.append(Trace(tuple(Step(ts) for ts in path)))
            return
        if len(path) == max_len:
            return
        on_path.add(state)
        for transitions, succ in engine.successors(state):
            if succ in on_path:
                continue
            path.append(transitions)
            visit(succ)
            path.pop()
        on_path.discard(state)

    visit(initial.assignment)
    minimal = tuple(trace for trace in candidates if is_minimal(network, initial, targets, trace))
    logger.debug(f"最小轨迹({semantics}, 长度<={max_len}): {len(minimal)}/{len(candidates)}")
    return minimal


def exists_until(network: Network, initial: GlobalState, avoid: Iterable[LocalState], goal) -> bool:
    """在异步可达图上求 E[(¬avoid) U goal]：反向最小不动点"""
    avoid = frozenset(avoid)
    targets = goal_states(goal)
    engine = ReachabilityEngine(network, ASYNC)
    states = [s.assignment for s in reachable_states(network, initial, ASYNC)]

    predecessors: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = {}
    for state in states:
        for _, succ in engine.successors(state):
            predecessors.setdefault(succ, []).append(state)

    def holds(state, local_states):
        return any(state[ls.automaton] == ls.index for ls in local_states)

    satisfying = {s for s in states if all(s[ls.automaton] == ls.index for ls in targets)}
    pending = list(satisfying)
    while pending:
        state = pending.pop()
        for prev in predecessors.get(state, ()):
            if prev not in satisfying and not holds(prev, avoid):
                satisfying.add(prev)
                pending.append(prev)
    return initial.assignment in satisfying


@dataclass
class SweepReport:
    checked: int = 0
    violations: Dict[str, List[int]] = field(default_factory=dict)
    skipped: List[int] = field(default_factory=list)
    disagreements: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, check: str, seed: int):
        seeds = self.violations.setdefault(check, [])
        if seed not in seeds:
            seeds.append(seed)

    def summary(self) -> Dict[str, object]:
        return {
            'checked': self.checked,
            'skipped': len(self.skipped),
            'failed_seeds': sorted({s for seeds in self.violations.values() for s in seeds}),
            'violations': {k: sorted(v) for k, v in sorted(self.violations.items())},
            'reading_disagreements': sorted(self.disagreements),
        }


def _random_cut(rng: random.Random, network: Network, initial: GlobalState,
                targets: FrozenSet[LocalState]) -> FrozenSet[LocalState]:
    candidates = [LocalState(a, i) for a in range(len(network.automata))
                  for i in range(network.state_count(a))
                  if i != initial.assignment[a] and LocalState(a, i) not in targets]
    if not candidates:
        return frozenset()
    return frozenset(rng.sample(candidates, rng.randint(0, min(3, len(candidates)))))


def check_instance(seed: int, params: GeneratorParams = SWEEP_PARAMS,
                   max_len: Optional[Dict[str, int]] = None,
                   report: Optional[SweepReport] = None) -> SweepReport:
    """对一个种子实例运行全部对照检查，把失败记录到 report"""
    report = report if report is not None else SweepReport()
    max_len = max_len or SWEEP_MAX_LEN
    network, initial, goal = random_instance(params.with_seed(seed))
    limits = SWEEP_LIMITS

    results = {flag: reduce(network, initial, goal, filter=flag) for flag in (True, False)}
    if not results[True].kept <= results[False].kept:
        report.record('filter_dominance', seed)
    for schedule in SCHEDULES:
        other = reduce(network, initial, goal, filter=True, schedule=schedule)
        if other.kept != results[True].kept or other.objectives != results[True].objectives:
            report.record('worklist_order', seed)

    # 最小轨迹都只用到 tr(B) 中的迁移
    minimal: Dict[str, Tuple[Trace, ...]] = {}
    try:
        for semantics in SEMANTICS:
            minimal[semantics] = enumerate_minimal_traces(network, initial, goal, max_len[semantics], semantics)
    except LimitExceeded:
        report.skipped.append(seed)
    for semantics, traces in minimal.items():
        for trace in traces:
            for result in results.values():
                if not transitions_of(trace) <= result.kept:
                    report.record(f'minimal_traces_kept_{semantics}', seed)
            # 在开头插入一个空步：只有 strict 读法会因此判为非最小
            for candidate in (trace, Trace((Step(),) + trace.steps)):
                readings = minimality_readings(network, initial, goal, candidate)
                if not readings['transitions']:
                    report.record(f'empty_step_minimality_{semantics}', seed)
                if candidate is not trace and readings['strict']:
                    report.record('strict_rejects_empty_steps', seed)
                if readings['transitions'] != readings['strict'] and seed not in report.disagreements:
                    report.disagreements.append(seed)
    if STEP in minimal:
        for trace in minimal.get(ASYNC, ()):
            if len(trace) <= max_len[STEP] and trace not in minimal[STEP]:
                report.record('async_minimal_is_step_minimal', seed)

    # 约简前后目标可达性一致
    originals = {}
    for semantics in SEMANTICS:
        original = reachable(network, initial, goal, semantics, limits, witness=False)
        originals[semantics] = original
        for flag, result in results.items():
            reduced = reachable(result.reduced, initial, goal, semantics, limits, witness=False)
            if reduced.reachable != original.reachable:
                report.record(f'preservation_{semantics}', seed)
            if result.statically_refuted and original.reachable:
                report.record('static_refutation', seed)
    all_async = reachable_states(network, initial, ASYNC, limits)
    all_step = reachable_states(network, initial, STEP, limits)
    if not all_async <= all_step:
        report.record('step_covers_async', seed)
    for result in results.values():
        if not reachable_states(result.reduced, initial, ASYNC, limits) <= all_async:
            report.record('reduced_subset', seed)

    # valid_s 的可靠性、不动点与顺序无关性
    oracle = compute_valid(network, initial)
    reached_locals = {ls for state in all_step for ls in state.locals()}
    for objective in all_objectives(network):
        if objective.origin in initial and not oracle.is_valid(objective) \
                and objective.target in reached_locals:
            report.record('validity_soundness', seed)
    if apply_f(network, initial, oracle.valid) != oracle.valid or kleene_valid(network, initial) != oracle.valid:
        report.record('validity_fixpoint', seed)
    count = len(network.automata)
    for order in (list(reversed(range(count))), list(range(1, count)) + [0]):
        if compute_valid(network, initial, order).valid != oracle.valid:
            report.record('validity_order', seed)

    # 切割集与 CTL 公式 not E[(¬cut) U goal] 一致
    targets = goal_states(goal)
    if not any(ls in initial for ls in targets):
        cut = _random_cut(random.Random(seed), network, initial, targets)
        if verify_cut_set(network, initial, goal, cut, ASYNC, limits) == exists_until(network, initial, cut, goal):
            report.record('cut_set', seed)

    report.checked += 1
    return report


def run_sweep(seeds: Iterable[int], max_len: Optional[int] = None,
              params: GeneratorParams = SWEEP_PARAMS) -> SweepReport:
    """max_len 给定时同时作为两种语义的长度上限（步语义不超过其默认值）"""
    lengths = dict(SWEEP_MAX_LEN)
    if max_len is not None:
        lengths = {ASYNC: max_len, STEP: min(max_len, SWEEP_MAX_LEN[STEP])}
    report = SweepReport()
    for seed in seeds:
        check_instance(seed, params, lengths, report)
    if report.passed:
        logger.info(f"种子扫描通过: {report.checked} 个实例, 跳过穷举 {len(report.skipped)} 个")
    else:
        logger.error(f"种子扫描发现违例: {report.summary()['violations']}")
    return report
