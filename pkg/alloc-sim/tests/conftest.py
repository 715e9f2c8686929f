"""テスト共通のヘルパー"""
import math
from dataclasses import replace

import pytest

from core import AlgorithmSpec, InitialAssignmentSpec, NoiseSpec, SimConfig


def make_config(**kwargs) -> SimConfig:
    """小さな既定設定（Ant, シグモイド, n=100, d=[25]）を kwargs で上書き"""
    base = SimConfig(
        n=100,
        k=1,
        demands=(25,),
        noise=NoiseSpec(kind="sigmoid", lam=30.0),
        algorithm=AlgorithmSpec(kind="ant"),
        gamma=0.05,
        horizon=50,
        seed=7,
    )
    if "demands" in kwargs and "k" not in kwargs:
        kwargs["k"] = len(kwargs["demands"])
    if isinstance(kwargs.get("algorithm"), str):
        kwargs["algorithm"] = AlgorithmSpec(kind=kwargs["algorithm"])
    if isinstance(kwargs.get("initial"), str):
        kwargs["initial"] = InitialAssignmentSpec(kind=kwargs["initial"])
    return replace(base, **kwargs)


@pytest.fixture
def config():
    return make_config()


def critical_lambda(gamma_star: float, d: int, n: int) -> float:
    return math.log(n ** 8 - 1) / (gamma_star * d)
