#!/usr/bin/env python3
"""
模型文本格式
解析/序列化 .an 网络描述文件，以及初始状态、目标、切割集、目标对象的说明字符串

文法（按行，UTF-8，# 到行尾为注释）:
    decl       := '"' NAME '"' '[' INT (',' INT)* ']'
    transition := '"' NAME '"' INT '->' INT ('when' cond ('and' cond)*)?
    cond       := '"' NAME '"' '=' INT
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from backend.an_core import ANError, GlobalState, LocalState, Network, Transition

logger = logging.getLogger(__name__)

_INT = re.compile(r'[0-9]+')
_WORD = re.compile(r'[A-Za-z_]+')


class ModelParseError(ANError, ValueError):
    """解析或校验错误，带有来源、行号与列号（均从 1 开始）"""

    def __init__(self, message: str, line: int = 1, column: int = 1, source: str = '<string>'):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


@dataclass
class TransitionLine:
    automaton: str
    origin: int
    destination: int
    conditions: List[Tuple[str, int, int]]  # (name, label, column)
    line: int
    column: int


@dataclass
class ModelDocument:
    """语法层面的模型文档：声明、迁移行及其源位置"""
    declarations: Dict[str, List[int]] = field(default_factory=dict)
    transitions: List[TransitionLine] = field(default_factory=list)
    locations: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    source: str = '<string>'


class _Scanner:
    """单行扫描器"""

    def __init__(self, text: str, line: int, source: str):
        self.text = text
        self.pos = 0
        self.line = line
        self.source = source

    @property
    def column(self) -> int:
        return self.pos + 1

    def error(self, message: str, column: Optional[int] = None) -> ModelParseError:
        return ModelParseError(message, self.line, column or self.column, self.source)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in ' \t\r':
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ''

    def expect(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            found = self.text[self.pos:self.pos + len(token)] or 'end of line'
            raise self.error(f"expected '{token}', found '{found}'")
        self.pos += len(token)

    def name(self) -> str:
        self.skip_ws()
        self.expect('"')
        end = self.text.find('"', self.pos)
        if end < 0:
            raise self.error("unterminated automaton name")
        value = self.text[self.pos:end]
        if not value:
            raise self.error("empty automaton name")
        self.pos = end + 1
        return value

    def integer(self) -> int:
        self.skip_ws()
        match = _INT.match(self.text, self.pos)
        if not match:
            raise self.error("expected a non-negative integer")
        self.pos = match.end()
        return int(match.group())

    def keyword(self) -> str:
        self.skip_ws()
        match = _WORD.match(self.text, self.pos)
        if not match:
            raise self.error("expected 'when' or 'and'")
        self.pos = match.end()
        return match.group()


def _read(text) -> str:
    if hasattr(text, 'read'):
        text = text.read()
    if isinstance(text, bytes):
        text = text.decode('utf-8')
    return text


def _strip_comment(raw: str) -> str:
    """去掉引号外的 # 注释"""
    quoted = False
    for pos, char in enumerate(raw):
        if char == '"':
            quoted = not quoted
        elif char == '#' and not quoted:
            return raw[:pos]
    return raw


def parse_document(text, source: str = '<string>') -> ModelDocument:
    """只做语法分析，不做语义校验"""
    doc = ModelDocument(source=source)
    for line_no, raw in enumerate(_read(text).split('\n'), start=1):
        line = _strip_comment(raw)
        scanner = _Scanner(line, line_no, source)
        if scanner.at_end():
            continue

        start = scanner.pos + 1
        name = scanner.name()
        if scanner.peek() == '[':
            scanner.expect('[')
            labels = [scanner.integer()]
            while scanner.peek() == ',':
                scanner.expect(',')
                labels.append(scanner.integer())
            scanner.expect(']')
            if not scanner.at_end():
                raise scanner.error("unexpected text after declaration")
            if name in doc.declarations:
                raise scanner.error(f"automaton \"{name}\" declared twice", start)
            if len(set(labels)) != len(labels):
                raise scanner.error(f"duplicate state in declaration of \"{name}\"", start)
            doc.declarations[name] = labels
            doc.locations[name] = (line_no, start)
            continue

        origin = scanner.integer()
        scanner.expect('->')
        destination = scanner.integer()
        conditions = []
        if not scanner.at_end():
            word = scanner.keyword()
            if word != 'when':
                raise scanner.error(f"expected 'when', found '{word}'")
            while True:
                scanner.skip_ws()
                column = scanner.column
                cond_name = scanner.name()
                scanner.expect('=')
                conditions.append((cond_name, scanner.integer(), column))
                if scanner.at_end():
                    break
                word = scanner.keyword()
                if word != 'and':
                    raise scanner.error(f"expected 'and', found '{word}'")
        doc.transitions.append(TransitionLine(name, origin, destination, conditions, line_no, start))
    return doc


def build_network(doc: ModelDocument) -> Network:
    """语义校验并构造网络；错误指向出错的行与列"""
    if not doc.declarations:
        raise ModelParseError("no automata declared", 1, 1, doc.source)
    network = Network(list(doc.declarations), list(doc.declarations.values()))

    def local(name: str, label: int, line: int, column: int) -> LocalState:
        if name not in doc.declarations:
            raise ModelParseError(f"undeclared automaton \"{name}\"", line, column, doc.source)
        if label not in doc.declarations[name]:
            raise ModelParseError(f"state {label} out of range for \"{name}\"", line, column, doc.source)
        return network.local(name, label)

    transitions = []
    for tl in doc.transitions:
        origin = local(tl.automaton, tl.origin, tl.line, tl.column)
        destination = local(tl.automaton, tl.destination, tl.line, tl.column)
        if origin == destination:
            raise ModelParseError("origin equals destination (self-loop)", tl.line, tl.column, doc.source)
        condition = {}
        for cond_name, label, column in tl.conditions:
            ls = local(cond_name, label, tl.line, column)
            if cond_name == tl.automaton:
                raise ModelParseError("condition on own automaton", tl.line, column, doc.source)
            if cond_name in condition:
                raise ModelParseError(f"duplicate automaton \"{cond_name}\" in condition",
                                      tl.line, column, doc.source)
            condition[cond_name] = ls
        transitions.append(Transition(origin, destination, frozenset(condition.values())))

    if len(set(transitions)) != len(transitions):
        logger.warning(f"{doc.source}: 重复的迁移已合并")
    network = network.with_transitions(transitions)
    logger.debug(f"解析模型 {doc.source}: {len(network.automata)} 个自动机, "
                 f"{len(network.all_transitions)} 个迁移")
    return network


def parse_model(text, source: str = '<string>') -> Network:
    return build_network(parse_document(text, source))


def serialize_model(network: Network) -> str:
    """确定性输出：自动机按声明顺序，迁移排序"""
    lines = [f'"{name}" [{", ".join(str(label) for label in labels)}]'
             for name, labels in zip(network.automata, network.states)]
    if network.all_transitions:
        lines.append('')
        lines.extend(network.describe_transition(t) for t in network.all_transitions)
    return '\n'.join(lines) + '\n'


def _assignments(text: str, network: Network, source: str) -> List[Tuple[LocalState, int]]:
    scanner = _Scanner(text, 1, source)
    result = []
    seen = set()
    if scanner.at_end():
        return result
    while True:
        scanner.skip_ws()
        column = scanner.column
        name = scanner.name()
        scanner.expect('=')
        label = scanner.integer()
        if name not in network.automata:
            raise scanner.error(f"unknown automaton \"{name}\"", column)
        if label not in network.states[network.automaton_index(name)]:
            raise scanner.error(f"state {label} out of range for \"{name}\"", column)
        if name in seen:
            raise scanner.error(f"duplicate assignment of \"{name}\"", column)
        seen.add(name)
        result.append((network.local(name, label), column))
        if scanner.at_end():
            return result
        scanner.expect(',')


def parse_state_spec(text: str, network: Network, partial: bool = False,
                     source: str = '<state>') -> Union[GlobalState, FrozenSet[LocalState]]:
    """`"a"=0,"b"=1` 形式的状态说明

    partial=False 时返回完整全局状态，未提及的自动机取首个声明状态；
    partial=True 时返回局部状态集合（用于目标与切割集）。
    """
    states = [ls for ls, _ in _assignments(_read(text or ''), network, source)]
    if partial:
        return frozenset(states)
    return network.initial_state(states)


def parse_goal_spec(text: str, network: Network, source: str = '<goal>') -> List[FrozenSet[LocalState]]:
    """目标说明；用 ';' 分隔的多个阶段表示顺序目标"""
    stages = []
    for chunk in _read(text).split(';'):
        stage = parse_state_spec(chunk, network, partial=True, source=source)
        if not stage:
            raise ModelParseError("empty goal stage", 1, 1, source)
        stages.append(stage)
    return stages


def parse_objective_spec(text: str, network: Network,
                         source: str = '<objective>') -> Tuple[LocalState, LocalState]:
    """`"a"=0..2` 形式的目标对象说明，返回 (起点, 终点)"""
    scanner = _Scanner(_read(text), 1, source)
    scanner.skip_ws()
    column = scanner.column
    name = scanner.name()
    scanner.expect('=')
    origin = scanner.integer()
    scanner.expect('..')
    target = scanner.integer()
    if not scanner.at_end():
        raise scanner.error("unexpected text after objective")
    if name not in network.automata:
        raise scanner.error(f"unknown automaton \"{name}\"", column)
    labels = network.states[network.automaton_index(name)]
    for label in (origin, target):
        if label not in labels:
            raise scanner.error(f"state {label} out of range for \"{name}\"", column)
    return network.local(name, origin), network.local(name, target)
