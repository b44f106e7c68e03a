"""随机网络上的种子扫描：约简、可达性与 valid_s 的各项性质与穷举基准逐一对照"""

import pytest

from backend.oracle import SWEEP_MAX_LEN, SWEEP_PARAMS, check_instance, run_sweep
from backend.reach import ASYNC, STEP

BLOCK = 50
BLOCKS = 10


@pytest.mark.slow
@pytest.mark.parametrize('block', range(BLOCKS))
def test_seed_sweep(block):
    seeds = range(block * BLOCK + 1, (block + 1) * BLOCK + 1)
    report = run_sweep(seeds)
    assert report.checked == BLOCK
    assert report.passed, report.summary()['violations']
    # 穷举超出预算的实例只跳过最小轨迹部分，不能占多数
    assert len(report.skipped) < BLOCK // 2


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(1, 101))
def test_shorter_enumeration_bound(seed):
    lengths = {ASYNC: 4, STEP: 2}
    report = check_instance(seed, SWEEP_PARAMS, lengths)
    assert report.passed, report.summary()['violations']


def test_sweep_configuration():
    assert SWEEP_PARAMS.automata[1] <= 4
    assert SWEEP_PARAMS.states[1] <= 3
    assert max(SWEEP_MAX_LEN.values()) <= 6
    SWEEP_PARAMS.validate()
