"""
リグレットと診断指標

r(t), R(t), 3分割 (r⁺, r≈, r⁻), ポテンシャル Φ/Ψ, closeness, 飽和判定, 振動検出。
リグレットの計算はすべて整数・有理数で行い、比だけを浮動小数点にする。
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from core import AlgorithmConstants, UndefinedMetricError, deficit


def _fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def _exact(x: Fraction):
    """整数になる有理数は int で返す"""
    return int(x) if x.denominator == 1 else x


# ========== リグレット ==========

def instantaneous_regret(loads, demands) -> int:
    """r(t) = Σ_j |d_j - w_j|"""
    return int(np.abs(deficit(loads, demands)).sum())


class Decomposer:
    """(1 + c⁺γ)d_j と (1 - c⁻γ)d_j を前計算して r⁺, r≈, r⁻ を出す

    c⁺ = 1.2·c_s, c⁻ = 1 + 1.2·c_s（c_s = 7/3 なら 2.8 と 3.8）
    """

    def __init__(self, demands, gamma, constants: AlgorithmConstants | None = None):
        c_s = (constants or AlgorithmConstants()).c_s
        g = _fraction(gamma)
        self.c_plus = Fraction(6, 5) * c_s
        self.c_minus = 1 + self.c_plus
        self.demands = tuple(int(d) for d in demands)
        self.upper = [(1 + self.c_plus * g) * d for d in self.demands]
        self.lower = [(1 - self.c_minus * g) * d for d in self.demands]

    def __call__(self, loads) -> tuple:
        w = [int(x) for x in loads]
        if len(w) != len(self.demands):
            from core import DimensionError
            raise DimensionError(f"length mismatch: loads {len(w)} vs demands {len(self.demands)}")
        total = sum(abs(d - x) for d, x in zip(self.demands, w))
        r_plus = sum((max(Fraction(0), x - u) for x, u in zip(w, self.upper)), Fraction(0))
        r_minus = sum((max(Fraction(0), lo - x) for x, lo in zip(w, self.lower)), Fraction(0))
        return _exact(r_plus), _exact(total - r_plus - r_minus), _exact(r_minus)


def regret_decomposition(loads, demands, gamma, constants: AlgorithmConstants | None = None) -> tuple:
    """(r⁺, r≈, r⁻)。r⁺ + r≈ + r⁻ = r は有理数で厳密に成り立つ"""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return Decomposer(demands, gamma, constants)(loads)


@dataclass
class RegretSeries:
    """ラウンドごとの r(t)、累積 R(t)、分割"""
    regret: np.ndarray
    cumulative: np.ndarray
    r_plus: list = field(default_factory=list)
    r_approx: list = field(default_factory=list)
    r_minus: list = field(default_factory=list)


def regret_series(trace) -> RegretSeries:
    r = np.asarray(trace.regret, dtype=np.int64)
    r_approx = [int(a) - p - m for a, p, m in zip(r, trace.r_plus, trace.r_minus)]
    return RegretSeries(r, np.cumsum(r), list(trace.r_plus), r_approx, list(trace.r_minus))


# ========== ポテンシャル ==========

@dataclass
class PotentialSeries:
    """フェーズ境界ごとの Φ, Ψ"""
    rounds: list[int] = field(default_factory=list)
    phi: list = field(default_factory=list)
    psi: list[int] = field(default_factory=list)


def potential_at(loads, demands, gamma) -> tuple:
    """Φ = Σ ((1+γ)d_j - w_j)·1[(1+γ)d_j > w_j], Ψ = その個数"""
    g = _fraction(gamma)
    phi = Fraction(0)
    psi = 0
    for d, w in zip(demands, loads):
        target = (1 + g) * int(d)
        if target > int(w):
            phi += target - int(w)
            psi += 1
    return _exact(phi), psi


def potentials(trace, gamma, phase_length: int = 2) -> PotentialSeries:
    """記録済みラウンドのうちフェーズ境界（t ≡ 0 mod phase_length）で Φ, Ψ を評価"""
    series = PotentialSeries()
    for t, loads in zip(trace.rounds, trace.loads):
        if int(t) % phase_length != 0:
            continue
        phi, psi = potential_at(loads, trace.config.demands, gamma)
        series.rounds.append(int(t))
        series.phi.append(phi)
        series.psi.append(psi)
    return series


# ========== closeness ==========

def default_burn_in(n: int, k: int, gamma: float, constants: AlgorithmConstants | None = None) -> int:
    """4·c_d·k·log2(n)/γ ラウンド"""
    c_d = (constants or AlgorithmConstants()).c_d
    return math.ceil(4 * float(c_d) * k * math.log2(max(n, 2)) / gamma)


def closeness(trace, gamma_star: float, demands, burn_in: int) -> float:
    """burn_in 以降の平均リグレット / (γ*·Σd)。加法的な O(1) 項は含めない"""
    denominator = gamma_star * sum(demands)
    if denominator == 0:
        raise UndefinedMetricError("closeness undefined: gamma* * sum(demands) = 0")
    regret = np.asarray(trace.regret)
    if not 0 <= burn_in < len(regret):
        raise UndefinedMetricError(f"burn_in {burn_in} must be below horizon {len(regret)}")
    return float(regret[burn_in:].mean()) / denominator


def saturation(loads, demands, gamma) -> bool:
    """全タスクで w_j >= (1-γ)d_j"""
    g = _fraction(gamma)
    return all(int(w) >= (1 - g) * int(d) for w, d in zip(loads, demands))


def exception_bound(demands, gamma) -> np.ndarray:
    """|Δ_j| の許容上限 5γd_j + 3"""
    return 5 * gamma * np.asarray(demands, dtype=np.float64) + 3


# ========== 振動 ==========

@dataclass
class TaskOscillation:
    task: int
    amplitudes: np.ndarray
    threshold: float
    flagged: int
    windows: int
    exception_rounds: int

    @property
    def flagged_fraction(self) -> float:
        return self.flagged / self.windows if self.windows else 0.0


@dataclass
class OscillationReport:
    window: int
    tasks: list[TaskOscillation]

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "tasks": [
                {
                    "task": t.task,
                    "max_amplitude": int(t.amplitudes.max()) if t.windows else 0,
                    "threshold": t.threshold,
                    "flagged_windows": t.flagged,
                    "windows": t.windows,
                    "exception_rounds": t.exception_rounds,
                }
                for t in self.tasks
            ],
        }


def oscillation_report(trace, window: int, threshold_fractions, gamma: float | None = None) -> OscillationReport:
    """タスクごとに幅 window の窓で max-min(Δ) を取り、threshold·d_j を超える窓を数える"""
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    demands = trace.config.demands
    g = trace.config.gamma if gamma is None else gamma
    thresholds = np.broadcast_to(np.asarray(threshold_fractions, dtype=np.float64), (len(demands),))
    deficits = np.asarray(trace.deficits)
    bound = exception_bound(demands, g)

    tasks = []
    for j, d in enumerate(demands):
        column = deficits[:, j]
        if len(column) >= window:
            views = np.lib.stride_tricks.sliding_window_view(column, window)
            amplitudes = views.max(axis=1) - views.min(axis=1)
        else:
            amplitudes = np.zeros(0, dtype=np.int64)
        limit = float(thresholds[j]) * d
        tasks.append(TaskOscillation(
            task=j + 1,
            amplitudes=amplitudes,
            threshold=limit,
            flagged=int((amplitudes > limit).sum()),
            windows=len(amplitudes),
            exception_rounds=int((np.abs(column) > bound[j]).sum()),
        ))
    return OscillationReport(window, tasks)


# ========== 要約 ==========

def summarize(trace, gamma_star: float | None, burn_in: int | None = None) -> dict:
    """JSON サマリ用の指標"""
    config = trace.config
    horizon = len(trace.regret)
    total = int(np.asarray(trace.regret).sum())
    summary = {
        "total_regret": total,
        "avg_regret": total / horizon if horizon else 0.0,
        "r_plus": float(sum(trace.r_plus, Fraction(0))),
        "r_approx": float(total - sum(trace.r_plus, Fraction(0)) - sum(trace.r_minus, Fraction(0))),
        "r_minus": float(sum(trace.r_minus, Fraction(0))),
        "exception_rounds": int(np.asarray(trace.exceptions).sum()),
        "closeness": None,
        "burn_in": None,
        "phi_final": None,
        "psi_final": None,
    }
    if horizon and gamma_star:
        if burn_in is None:
            burn_in = min(default_burn_in(config.n, config.k, config.gamma, config.algorithm.constants),
                          horizon // 2)
        burn_in = min(burn_in, horizon - 1)
        summary["burn_in"] = burn_in
        summary["closeness"] = closeness(trace, gamma_star, config.demands, burn_in)
    series = potentials(trace, config.gamma, getattr(trace, "phase_length", 2))
    if series.rounds:
        summary["phi_final"] = float(series.phi[-1])
        summary["psi_final"] = series.psi[-1]
    return summary
