#!/usr/bin/env python3
"""
自动机网络面向目标约简工具 - 主程序入口
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

# 将当前目录添加到Python路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from anred_api import EXIT_INPUT, ReductionAPI
from backend.reach import DEFAULT_MAX_STATES, DEFAULT_MAX_STEPS, SEMANTICS
from backend.run_report import RunReport

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """用法错误与 --help 都抛出异常而不是退出进程，帮助写到标准错误，报告照常输出"""

    def error(self, message):
        raise UsageError(message)

    def print_help(self, file=None):
        super().print_help(file or sys.stderr)

    def exit(self, status=0, message=None):
        if message:
            sys.stderr.write(message)
        raise HelpShown(self.prog)


class UsageError(Exception):
    pass


class HelpShown(Exception):
    """--help 已把帮助写到标准错误"""


def setup_logging(debug: bool = False):
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(logging.DEBUG if debug else logging.INFO)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--debug', action='store_true', default=argparse.SUPPRESS, help='调试模式')

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument('-m', '--model', required=True, help='模型文件 (.an)，- 表示标准输入')
    model.add_argument('--initial', default='', help='初始状态，例如 \'"a"=0,"b"=1\'；未提及的自动机取首个状态')

    limits = argparse.ArgumentParser(add_help=False)
    limits.add_argument('--semantics', choices=SEMANTICS, default='async', help='异步语义或一般步语义')
    limits.add_argument('--max-states', type=int, default=DEFAULT_MAX_STATES, help='状态数上限')
    limits.add_argument('--max-steps', type=int, default=DEFAULT_MAX_STEPS, help='BFS 深度上限')

    parser = _ArgumentParser(prog='anred', description='自动机网络面向目标约简工具', parents=[common])
    parser.set_defaults(debug=False)
    sub = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=_ArgumentParser)
    sub.required = True

    p = sub.add_parser('reduce', parents=[common, model], help='约简网络')
    p.add_argument('--goal', required=True, help='目标，例如 \'"c"=2\'；用 ; 分隔顺序目标的各阶段')
    p.add_argument('--no-filter', action='store_true', help='不过滤不可能的目标对象')
    p.add_argument('--prune-isolated', action='store_true', help='删除与约简结果无关的自动机')
    p.add_argument('-o', '--output', help='约简后模型的输出文件')

    p = sub.add_parser('reach', parents=[common, model, limits], help='目标可达性')
    p.add_argument('--goal', required=True, help='目标（部分赋值），; 分隔顺序目标')
    p.add_argument('--witness', action='store_true', help='输出最短见证轨迹')

    sub.add_parser('count', parents=[common, model, limits], help='可达状态计数')

    p = sub.add_parser('cutset', parents=[common, model, limits], help='验证切割集')
    p.add_argument('--goal', required=True, help='目标（部分赋值）')
    p.add_argument('--cut', required=True, help='切割集，例如 \'"a"=1,"b"=1\'')

    p = sub.add_parser('paths', parents=[common, model], help='列出目标对象的局部路径')
    p.add_argument('--objective', required=True, help='目标对象，例如 \'"c"=0..2\'')

    sub.add_parser('valid', parents=[common, model], help='计算 valid_s 不动点')

    p = sub.add_parser('oracle', parents=[common], help='随机网络上的穷举对照扫描')
    p.add_argument('--seeds', default='1..100', help="种子区间 'A..B' 或数量 N")
    p.add_argument('--max-len', type=int, default=None, help='最小轨迹穷举的长度上限')

    sub.add_parser('stats', parents=[common, model], help='网络规模统计')
    return parser


def dispatch(api: ReductionAPI, args: argparse.Namespace) -> dict:
    command = args.command
    if command == 'reduce':
        return api.reduce(args.model, args.goal, args.initial, filter=not args.no_filter,
                          prune=args.prune_isolated, output=args.output)
    if command == 'reach':
        return api.reach(args.model, args.goal, args.initial, args.semantics,
                         args.max_states, args.max_steps, witness=args.witness)
    if command == 'count':
        return api.count(args.model, args.initial, args.semantics, args.max_states, args.max_steps)
    if command == 'cutset':
        return api.cutset(args.model, args.goal, args.cut, args.initial, args.semantics,
                          args.max_states, args.max_steps)
    if command == 'paths':
        return api.paths(args.model, args.objective, args.initial)
    if command == 'valid':
        return api.valid(args.model, args.initial)
    if command == 'oracle':
        return api.oracle(args.seeds, args.max_len)
    return api.stats(args.model)


def run(argv: Optional[List[str]] = None, stdin=None) -> int:
    """执行一次命令；报告恰好输出一次到标准输出，人类可读文本到标准错误"""
    argv = list(sys.argv[1:] if argv is None else argv)
    report = RunReport(argv=argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        setup_logging()
        report.verdict = 'error'
        report.error = f"usage: {e}"
        report.exit_code = EXIT_INPUT
        logger.error(report.error)
    except HelpShown as e:
        setup_logging()
        prog = str(e).split()
        report.command = prog[-1] if len(prog) > 1 else None
        report.verdict = 'help'
    else:
        setup_logging(getattr(args, 'debug', False))
        report.command = args.command
        outcome = dispatch(ReductionAPI(report, stdin), args)
        report.result = outcome.get('result', {})
        report.verdict = outcome.get('verdict')
        report.exit_code = outcome['exit_code']
        report.error = outcome.get('error')

    sys.stdout.write(report.render())
    sys.stdout.flush()
    sys.stderr.write(report.render_human())
    return report.exit_code


def main():
    """主函数"""
    sys.exit(run())


if __name__ == "__main__":
    main()
