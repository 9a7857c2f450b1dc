import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from fractions import Fraction

import pytest

from trapscan.core import Address
from trapscan.mockchain import (
    AddLiquidity,
    AttackScript,
    CreatePool,
    DeployToken,
    Honest,
    MockChain,
    VictimBuy,
    Wait,
    WashBuy,
    run_attack_script,
)


@pytest.fixture
def chain():
    return MockChain()


@pytest.fixture
def owner():
    return Address.derive("owner")


@pytest.fixture
def trader():
    return Address.derive("trader")


def simple_script(behavior, extra=(), victims=1, liquidity=(10**9, 10**9),
                  wash_amount=10**6, victim_amount=2 * 10**6, wash_times=3):
    steps = [
        DeployToken(behavior),
        CreatePool(),
        AddLiquidity(*liquidity),
        WashBuy(amount=wash_amount, times=wash_times),
        *[VictimBuy(victim=v, amount=victim_amount) for v in range(victims)],
        *extra,
        Wait(blocks=3),
    ]
    return AttackScript(steps=tuple(steps))


def run_simple(behavior, seed=42, **kwargs):
    return run_attack_script(simple_script(behavior, **kwargs), seed)


@pytest.fixture
def honest_trace():
    return run_simple(Honest(Fraction(0)))
