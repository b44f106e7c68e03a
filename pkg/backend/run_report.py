#!/usr/bin/env python3
"""
运行报告
记录命令回显、输入摘要、各阶段耗时与结果，渲染为机器可读的 key=value 文档
（标准输出）和人类可读的文本（标准错误）
"""

import hashlib
import json
import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
# 固定的键顺序
FIELDS = ('schema', 'command', 'argv', 'digests', 'result', 'verdict', 'exit_code', 'error', 'timings_ms')
VOLATILE_FIELDS = ('timings_ms',)


def sha256_digest(content: bytes) -> str:
    return 'sha256:' + hashlib.sha256(content).hexdigest()


class RunReport:
    """一次 CLI 调用的报告"""

    def __init__(self, command: Optional[str] = None, argv: Sequence[str] = ()):
        self.command = command
        self.argv: List[str] = list(argv)
        self.digests: Dict[str, str] = {}
        self.timings_ms: Dict[str, float] = {}
        self.result: Dict[str, Any] = {}
        self.verdict: Optional[str] = None
        self.exit_code = 0
        self.error: Optional[str] = None

    @contextmanager
    def phase(self, name: str):
        """计时一个阶段（毫秒）；同名阶段累加"""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - start) * 1000
            self.timings_ms[name] = round(self.timings_ms.get(name, 0.0) + elapsed, 3)
            logger.debug(f"阶段 {name}: {elapsed:.3f} ms")

    def add_digest(self, label: str, content: bytes):
        self.digests[label] = sha256_digest(content)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': SCHEMA_VERSION,
            'command': self.command,
            'argv': self.argv,
            'digests': self.digests,
            'result': self.result,
            'verdict': self.verdict,
            'exit_code': self.exit_code,
            'error': self.error,
            'timings_ms': self.timings_ms,
        }

    def render(self) -> str:
        data = self.to_dict()
        return ''.join(f"{key}={json.dumps(data[key], sort_keys=True, ensure_ascii=False)}\n"
                       for key in FIELDS)

    def render_human(self) -> str:
        lines = [f"[{self.command or '-'}] {self.verdict or 'error'} (exit {self.exit_code})"]
        if self.error:
            lines.append(f"  error: {self.error}")
        for key, value in self.result.items():
            if isinstance(value, list) and value and len(json.dumps(value, ensure_ascii=False)) > 72:
                lines.append(f"  {key}:")
                lines.extend(f"    {json.dumps(item, ensure_ascii=False) if not isinstance(item, str) else item}"
                             for item in value)
            else:
                lines.append(f"  {key}: {json.dumps(value, ensure_ascii=False)}")
        if self.timings_ms:
            lines.append('  timings: ' + ', '.join(f"{k}={v:.1f}ms" for k, v in self.timings_ms.items()))
        return '\n'.join(lines) + '\n'


def parse_report(text: str) -> Dict[str, Any]:
    """render() 的逆过程"""
    data = {}
    for line in text.splitlines():
        if not line:
            continue
        key, _, value = line.partition('=')
        data[key] = json.loads(value)
    return data


def canonicalize(text: str) -> str:
    """去掉与运行时间相关的字段，用于比较报告"""
    return ''.join(line + '\n' for line in text.splitlines()
                   if line and line.partition('=')[0] not in VOLATILE_FIELDS)
