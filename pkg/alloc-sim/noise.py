"""
フィードバックオラクル

シグモイド雑音モデル、敵対的モデル（差し替え可能な敵対者）、
臨界値 γ* とグレーゾーンの計算。

どのオラクルも (seed, round, ant, task, deficits) の純粋関数。
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

import rng
from core import AdversaryStrategy, FeedbackMatrix, NoiseSpec, SimConfig
from settings import get_logger, make_log

logger = get_logger("noise")
log = make_log(logger)


# ========== シグモイド ==========

def sigmoid(x, lam: float):
    """s(x) = 1 / (1 + e^{-λx})（スカラーなら float、配列なら配列）"""
    out = expit(lam * np.asarray(x, dtype=np.float64))
    if out.ndim == 0:
        return float(out)
    return out


def critical_value(noise: NoiseSpec | float, demands, n: int) -> float:
    """臨界値 γ*

    シグモイド: s(-x'·d_j) <= n^-8 を全タスクで満たす最小の x'
    （閉形式 ln(n^8 - 1) / (λ·min d)）。敵対的モデルは γ^ad をそのまま返す。
    雑音なしオラクルは 0。
    """
    if isinstance(noise, NoiseSpec):
        if noise.kind == "adversarial":
            return float(noise.gamma_ad)
        if noise.kind == "exact":
            return 0.0
        lam = noise.lam
    else:
        lam = float(noise)

    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if n < 2:
        raise ValueError(f"critical value needs n >= 2, got {n}")

    d_min = min(demands)
    threshold = float(n) ** -8
    gamma_star = math.log(n ** 8 - 1) / (lam * d_min)
    # 丸め誤差で定義の不等式を外れたら 1ulp ずつ上げる
    while sigmoid(-gamma_star * d_min, lam) > threshold:
        gamma_star = math.nextafter(gamma_star, math.inf)

    if gamma_star > 0.5:
        log(f"臨界値が 1/2 を超えています: γ*={gamma_star:.6f}", level="warning")
    return gamma_star


def lambda_for_critical(gamma_star: float, demands, n: int) -> float:
    """γ* が指定値になる λ（ln(n^8 - 1) / (γ*·min d)）"""
    return math.log(n ** 8 - 1) / (gamma_star * min(demands))


@dataclass(frozen=True)
class GreyZone:
    """タスク別の区間 [-γ*·d_j, γ*·d_j]"""
    low: tuple[float, ...]
    high: tuple[float, ...]

    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.low, self.high))

    def contains(self, deficits) -> np.ndarray:
        d = np.asarray(deficits, dtype=np.float64)
        return (d >= np.asarray(self.low)) & (d <= np.asarray(self.high))


def grey_zone(demands, gamma_star: float) -> GreyZone:
    width = [gamma_star * d for d in demands]
    return GreyZone(tuple(-w + 0.0 for w in width), tuple(w + 0.0 for w in width))


# ========== シグモイドフィードバック ==========

def sample_feedback_sigmoid(deficits, lam: float, ctx: rng.RandomnessContext, round_index: int,
                            n: int, correlated: bool = False) -> FeedbackMatrix:
    """各 (アリ, タスク) が独立に確率 s(Δ_j) で lack

    correlated=True では (round, task) ごとに1つの乱数を全アリで共有する。
    """
    p = sigmoid(np.asarray(deficits), lam)
    k = p.shape[0]
    if correlated:
        u = ctx.uniforms(round_index, rng.FEEDBACK, (1, k))
        lack = np.broadcast_to(u < p, (n, k)).copy()
    else:
        lack = ctx.uniforms(round_index, rng.FEEDBACK, (n, k)) < p
    return FeedbackMatrix(round_index, lack)


def exact_feedback(deficits, round_index: int, n: int) -> FeedbackMatrix:
    """雑音なしオラクル: Δ >= 0（負荷 <= 需要）なら lack"""
    d = np.asarray(deficits)
    return FeedbackMatrix(round_index, np.broadcast_to(d >= 0, (n, d.shape[0])).copy())


# ========== 敵対的フィードバック ==========

# 敵対者: (deficits, demands, gamma_ad, strategy, ctx, round, n) -> (n, k) の lack 行列
# グレーゾーン外は adversarial_feedback 側で正しい値に上書きされる
AdversaryFn = Callable[[np.ndarray, np.ndarray, float, AdversaryStrategy, rng.RandomnessContext, int, int], np.ndarray]

ADVERSARIES: dict[str, AdversaryFn] = {}


def register_adversary(kind: str):
    """新しい敵対者を登録するデコレータ"""
    def wrap(fn: AdversaryFn) -> AdversaryFn:
        ADVERSARIES[kind] = fn
        return fn
    return wrap


@register_adversary("all-lack-in-grey")
def _all_lack(deficits, demands, gamma_ad, strategy, ctx, round_index, n):
    return np.ones((n, deficits.shape[0]), dtype=bool)


@register_adversary("all-overload-in-grey")
def _all_overload(deficits, demands, gamma_ad, strategy, ctx, round_index, n):
    return np.zeros((n, deficits.shape[0]), dtype=bool)


@register_adversary("correct-outside-random-inside")
def _random_inside(deficits, demands, gamma_ad, strategy, ctx, round_index, n):
    correct = np.broadcast_to(deficits >= 0, (n, deficits.shape[0]))
    flip = ctx.uniforms(round_index, rng.ADVERSARY, (n, deficits.shape[0])) < strategy.p
    return correct ^ flip


@register_adversary("per-ant-alternating")
def _alternating(deficits, demands, gamma_ad, strategy, ctx, round_index, n):
    ants = (np.arange(n) + round_index) % 2 == 0
    return np.broadcast_to(ants[:, None], (n, deficits.shape[0])).copy()


def indistinguishability_tau(demands, gamma_ad: float, strategy: AdversaryStrategy) -> np.ndarray:
    """閾値 τ_j（常に τ_j <= γ^ad·d_j）

    省略時、shifted=False は floor(γ^ad·d_j)。shifted=True の需要は d_j + 2τ_j なので
    τ_j = floor(γ^ad·d'_j / (1 + 2γ^ad)) で元の τ_j を復元する。
    """
    if strategy.tau is not None:
        return np.asarray(strategy.tau, dtype=np.int64)
    dem = np.asarray(demands, dtype=np.float64)
    if strategy.shifted:
        dem = dem / (1 + 2 * gamma_ad)
    return np.floor(gamma_ad * dem + 1e-9).astype(np.int64)


def shifted_demands(demands, gamma_ad: float) -> tuple[int, ...]:
    """区別できない相方の需要 d_j + 2τ_j"""
    tau = indistinguishability_tau(demands, gamma_ad, AdversaryStrategy(kind="indistinguishability"))
    return tuple(int(d + 2 * t) for d, t in zip(demands, tau))


@register_adversary("indistinguishability")
def _indistinguishability(deficits, demands, gamma_ad, strategy, ctx, round_index, n):
    tau = indistinguishability_tau(demands, gamma_ad, strategy)
    # shifted=False: Δ >= -τ で lack、shifted=True: Δ >= τ で lack
    lack = deficits >= tau if strategy.shifted else deficits >= -tau
    return np.broadcast_to(lack, (n, deficits.shape[0])).copy()


def adversarial_feedback(deficits, demands, gamma_ad: float, strategy: AdversaryStrategy,
                         ctx: rng.RandomnessContext, round_index: int, n: int) -> FeedbackMatrix:
    """Δ > γ^ad·d なら lack、Δ < -γ^ad·d なら overload、それ以外は敵対者が決める"""
    d = np.asarray(deficits, dtype=np.int64)
    dem = np.asarray(demands, dtype=np.float64)
    proposal = ADVERSARIES[strategy.kind](d, dem, gamma_ad, strategy, ctx, round_index, n)
    above = d > gamma_ad * dem
    below = d < -gamma_ad * dem
    lack = np.where(above, True, np.where(below, False, proposal))
    return FeedbackMatrix(round_index, np.asarray(lack, dtype=bool))


# ========== ディスパッチ ==========

def feedback(config: SimConfig, deficits, ctx: rng.RandomnessContext, round_index: int) -> FeedbackMatrix:
    """設定の雑音モデルで round_index のフィードバックを生成"""
    noise = config.noise
    if noise.kind == "sigmoid":
        return sample_feedback_sigmoid(deficits, noise.lam, ctx, round_index, config.n, noise.correlated)
    if noise.kind == "adversarial":
        return adversarial_feedback(deficits, config.demands, noise.gamma_ad, noise.adversary,
                                    ctx, round_index, config.n)
    return exact_feedback(deficits, round_index, config.n)


def sigmoid_table(lam: float, demands, gamma_star: float, low: int, high: int) -> list[dict]:
    """deficit ごとの lack 確率とグレーゾーン判定（プロット用）"""
    zone = grey_zone(demands, gamma_star)
    rows = []
    for j, d in enumerate(demands, start=1):
        for x in range(low, high + 1):
            rows.append({
                "task": j,
                "deficit": x,
                "p_lack": sigmoid(x, lam),
                "in_grey_zone": zone.low[j - 1] <= x <= zone.high[j - 1],
            })
    return rows
