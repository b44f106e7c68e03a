#!/usr/bin/env python3
"""
约简工具主接口
整合解析、约简、可达性、切割集与基准扫描，为命令行提供统一的接口
"""

import logging
import sys
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from backend.an_core import ANError, GlobalState, LocalState, Network, Trace
from backend.an_format import (ModelParseError, parse_goal_spec, parse_model, parse_objective_spec,
                               parse_state_spec, serialize_model)
from backend.causality import FixpointOracle, LocalCausality, Objective, all_objectives
from backend.oracle import OracleError, run_sweep
from backend.reach import (ASYNC, DEFAULT_MAX_STATES, DEFAULT_MAX_STEPS, LimitExceeded, Limits,
                           count_states, reachable, verify_cut_set)
from backend.reduction import DEFAULT_GOAL_AUTOMATON, Goal, encode_sequential_goal, prune_isolated, reduce
from backend.run_report import RunReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3


def parse_seeds(text: str) -> range:
    """'A..B'（闭区间）或 'N'（即 1..N）"""
    text = text.strip()
    try:
        if '..' in text:
            low, high = text.split('..', 1)
            seeds = range(int(low), int(high) + 1)
        else:
            seeds = range(1, int(text) + 1)
    except ValueError:
        raise OracleError(f"invalid seed range: {text!r}") from None
    if not seeds:
        raise OracleError(f"empty seed range: {text!r}")
    return seeds


class ReductionAPI:
    """各子命令的实现；每个方法返回 {'success': bool, ...}，并把耗时与摘要记入 report"""

    def __init__(self, report: Optional[RunReport] = None, stdin=None):
        self.report = report if report is not None else RunReport()
        self.stdin = stdin
        self.network: Optional[Network] = None

    # 输入
    def load_model(self, path: str) -> Network:
        """读取并解析模型文件；'-' 表示标准输入"""
        with self.report.phase('parse'):
            if path == '-':
                stream = self.stdin if self.stdin is not None else sys.stdin
                text = stream.read()
                content = text.encode('utf-8') if isinstance(text, str) else text
                source = '<stdin>'
            else:
                with open(path, 'rb') as f:
                    content = f.read()
                source = path
            self.report.add_digest('model', content)
            self.network = parse_model(content, source)
        logger.info(f"已加载模型 {source}: {len(self.network.automata)} 个自动机, "
                    f"{len(self.network.all_transitions)} 个迁移")
        return self.network

    def _initial(self, network: Network, initial: Optional[str]) -> GlobalState:
        return parse_state_spec(initial or '', network, source='--initial')

    def _goal(self, network: Network, initial: GlobalState,
              goal: str) -> Tuple[Network, GlobalState, Goal, bool]:
        """单个局部状态直接作为目标；多个局部状态或多阶段目标用额外自动机编码"""
        stages = parse_goal_spec(goal, network, source='--goal')
        if len(stages) == 1 and len(stages[0]) == 1:
            return network, initial, Goal(next(iter(stages[0]))), False
        extended, encoded = encode_sequential_goal(network, stages, DEFAULT_GOAL_AUTOMATON)
        logger.info(f"目标编码为 {len(stages)} 个阶段的顺序目标")
        return extended, extended.initial_state(initial.locals()), encoded, True

    def _single_stage(self, network: Network, goal: str) -> FrozenSet[LocalState]:
        stages = parse_goal_spec(goal, network, source='--goal')
        if len(stages) != 1:
            raise ModelParseError("sequential goals are not supported by this command", 1, 1, '--goal')
        return stages[0]

    def _trace(self, network: Network, trace: Trace) -> List[List[str]]:
        return [[network.describe_transition(t) for t in step] for step in trace]

    def _failure(self, e: Exception) -> Dict[str, Any]:
        if isinstance(e, LimitExceeded):
            logger.warning(f"结论不确定: {e}")
            return {'success': False, 'error': str(e), 'verdict': 'inconclusive', 'exit_code': EXIT_INCONCLUSIVE}
        if isinstance(e, (ANError, ValueError, OSError, UnicodeDecodeError)):
            logger.error(f"输入错误: {e}")
        else:
            logger.exception(f"Unexpected error: {e}")
        return {'success': False, 'error': str(e), 'verdict': 'error', 'exit_code': EXIT_INPUT}

    # 子命令
    def reduce(self, model: str, goal: str, initial: Optional[str] = None, filter: bool = True,
               prune: bool = False, output: Optional[str] = None) -> Dict[str, Any]:
        try:
            network = self.load_model(model)
            start = self._initial(network, initial)
            target_network, target_initial, target, sequential = self._goal(network, start, goal)
            with self.report.phase('reduce'):
                result = reduce(target_network, target_initial, target, filter=filter)
            reduced = prune_isolated(result) if prune else result.reduced
            if sequential:
                reduced = reduced.project(name for name in reduced.automata if name != DEFAULT_GOAL_AUTOMATON)

            payload = result.summary()
            payload['transitions_before'] = len(network.all_transitions)
            payload['transitions_after'] = len(reduced.all_transitions)
            payload['sequential_goal'] = sequential
            payload['kept'] = [reduced.describe_transition(t) for t in reduced.all_transitions]
            if output:
                with self.report.phase('write'):
                    with open(output, 'w', encoding='utf-8') as f:
                        f.write(serialize_model(reduced))
                payload['output'] = output
            logger.info(f"约简: |T| {payload['transitions_before']} -> {payload['transitions_after']}")

            if result.trivially_satisfied:
                verdict = 'trivially_satisfied'
            elif result.statically_refuted:
                verdict = 'statically_refuted'
            else:
                verdict = 'reduced'
            return {'success': True, 'result': payload, 'verdict': verdict, 'exit_code': EXIT_OK}
        except Exception as e:
            return self._failure(e)

    def reach(self, model: str, goal: str, initial: Optional[str] = None, semantics: str = ASYNC,
              max_states: int = DEFAULT_MAX_STATES, max_steps: int = DEFAULT_MAX_STEPS,
              witness: bool = False) -> Dict[str, Any]:
        try:
            network = self.load_model(model)
            start = self._initial(network, initial)
            stages = parse_goal_spec(goal, network, source='--goal')
            if len(stages) == 1:
                target_network, target_initial, targets = network, start, stages[0]
            else:
                target_network, target_initial, encoded, _ = self._goal(network, start, goal)
                targets = frozenset([encoded.target])
            limits = Limits(max_states, max_steps)
            with self.report.phase('search'):
                result = reachable(target_network, target_initial, targets, semantics, limits)

            payload: Dict[str, Any] = {
                'semantics': semantics,
                'reachable': result.reachable,
                'states_explored': result.states_explored,
                'frontier_peak': result.frontier_peak,
                'witness_length': len(result.witness) if result.witness is not None else None,
            }
            if witness and result.witness is not None:
                payload['witness'] = self._trace(target_network, result.witness)
            code = EXIT_INCONCLUSIVE if result.inconclusive else EXIT_OK
            return {'success': True, 'result': payload, 'verdict': result.verdict, 'exit_code': code}
        except Exception as e:
            return self._failure(e)

    def count(self, model: str, initial: Optional[str] = None, semantics: str = ASYNC,
              max_states: int = DEFAULT_MAX_STATES, max_steps: int = DEFAULT_MAX_STEPS) -> Dict[str, Any]:
        try:
            network = self.load_model(model)
            start = self._initial(network, initial)
            with self.report.phase('search'):
                states = count_states(network, start, Limits(max_states, max_steps), semantics)
            payload = {'semantics': semantics, 'states': states}
            if states is None:
                return {'success': True, 'result': payload, 'verdict': 'inconclusive',
                        'exit_code': EXIT_INCONCLUSIVE}
            return {'success': True, 'result': payload, 'verdict': 'counted', 'exit_code': EXIT_OK}
        except Exception as e:
            return self._failure(e)

    def cutset(self, model: str, goal: str, cut: str, initial: Optional[str] = None,
               semantics: str = ASYNC, max_states: int = DEFAULT_MAX_STATES,
               max_steps: int = DEFAULT_MAX_STEPS) -> Dict[str, Any]:
        try:
            network = self.load_model(model)
            start = self._initial(network, initial)
            targets = self._single_stage(network, goal)
            cut_states = parse_state_spec(cut or '', network, partial=True, source='--cut')
            with self.report.phase('search'):
                holds = verify_cut_set(network, start, targets, cut_states, semantics,
                                       Limits(max_states, max_steps))
            payload = {
                'cut': sorted(network.describe(ls) for ls in cut_states),
                'cut_set': holds,
                'semantics': semantics,
            }
            if holds:
                return {'success': True, 'result': payload, 'verdict': 'cut_set', 'exit_code': EXIT_OK}
            return {'success': True, 'result': payload, 'verdict': 'not_cut_set', 'exit_code': EXIT_FALSE}
        except Exception as e:
            return self._failure(e)

    def paths(self, model: str, objective: str, initial: Optional[str] = None) -> Dict[str, Any]:
        try:
            network = self.load_model(model)
            start = self._initial(network, initial)
            origin, target = parse_objective_spec(objective, network, source='--objective')
            with self.report.phase('paths'):
                causality = LocalCausality(network)
                oracle = FixpointOracle(network, start)
                obj = Objective(origin, target)
                local = causality.local_paths(obj)
                filtered = causality.filtered_paths(obj, oracle)
            payload = {
                'objective': objective,
                'local_paths': [[network.describe_transition(t) for t in path] for path in local],
                'filtered_paths': [[network.describe_transition(t) for t in path] for path in filtered],
                'valid': oracle.is_valid(obj),
            }
            return {'success': True, 'result': payload, 'verdict': 'listed', 'exit_code': EXIT_OK}
        except Exception as e:
            return self._failure(e)

    def valid(self, model: str, initial: Optional[str] = None) -> Dict[str, Any]:
        try:
            network = self.load_model(model)
            start = self._initial(network, initial)
            with self.report.phase('fixpoint'):
                oracle = FixpointOracle(network, start)

            def describe(obj: Objective) -> str:
                return f"{network.describe(obj.origin)}..{network.label(obj.target)}"

            objectives = [obj for obj in all_objectives(network) if not obj.reflexive]
            payload = {
                'valid': [describe(obj) for obj in objectives if oracle.is_valid(obj)],
                'invalid': [describe(obj) for obj in objectives if not oracle.is_valid(obj)],
                'reached_local_states': sorted(network.describe(ls) for ls in oracle.reached),
            }
            return {'success': True, 'result': payload, 'verdict': 'computed', 'exit_code': EXIT_OK}
        except Exception as e:
            return self._failure(e)

    def oracle(self, seeds: str = '1..100', max_len: Optional[int] = None) -> Dict[str, Any]:
        try:
            seed_range = parse_seeds(seeds)
            if max_len is not None and max_len < 0:
                raise OracleError("--max-len must be non-negative")
            with self.report.phase('sweep'):
                sweep = run_sweep(seed_range, max_len)
            payload = sweep.summary()
            payload['seeds'] = f"{seed_range.start}..{seed_range.stop - 1}"
            if sweep.passed:
                return {'success': True, 'result': payload, 'verdict': 'passed', 'exit_code': EXIT_OK}
            return {'success': True, 'result': payload, 'verdict': 'violations', 'exit_code': EXIT_FALSE}
        except Exception as e:
            return self._failure(e)

    def stats(self, model: str) -> Dict[str, Any]:
        try:
            network = self.load_model(model)
            payload = {
                'automata': len(network.automata),
                'local_states': sum(len(labels) for labels in network.states),
                'transitions': len(network.all_transitions),
                'product_size': network.product_size(),
                'per_automaton': {name: {'states': len(labels), 'transitions': len(ts)}
                                  for name, labels, ts in zip(network.automata, network.states,
                                                              network.transitions)},
            }
            return {'success': True, 'result': payload, 'verdict': 'computed', 'exit_code': EXIT_OK}
        except Exception as e:
            return self._failure(e)
