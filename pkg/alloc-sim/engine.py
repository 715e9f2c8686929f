"""
シミュレーションエンジン

同期モデル（全アリが毎ラウンド行動）と逐次モデル（毎ラウンド1匹だけ行動）。
ラウンド t のフィードバックはラウンド t-1 終了時の deficit から作る。
ラウンド番号は 1 始まり。
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

import noise
import rng
from algorithms import algorithm_for
from core import (
    IDLE,
    DimensionError,
    InitialAssignmentSpec,
    SimConfig,
    UnsupportedModelError,
    compute_loads,
    deficit,
    require_valid,
)
from metrics import Decomposer, exception_bound
from settings import get_logger, make_log

logger = get_logger("engine")
log = make_log(logger)

CSV_HEADER = ["round", "task", "load", "deficit", "regret"]


# ========== Trace ==========

@dataclass
class Trace:
    """1回の実行の記録

    rounds / loads は record_every ごとの間引き記録。
    regret, r_plus, r_minus, exceptions, actions_changed は全ラウンド分。
    """
    config: SimConfig
    initial_assignment: np.ndarray
    final_assignment: np.ndarray
    rounds: np.ndarray
    loads: np.ndarray
    regret: np.ndarray
    r_plus: list = field(default_factory=list)
    r_minus: list = field(default_factory=list)
    exceptions: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    actions_changed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    phase_length: int = 1
    warnings: list[str] = field(default_factory=list)
    final_states: list[str] | None = None

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def horizon(self) -> int:
        return len(self.regret)

    @property
    def deficits(self) -> np.ndarray:
        if len(self.loads) == 0:
            return np.zeros((0, self.config.k), dtype=np.int64)
        return np.asarray(self.config.demands, dtype=np.int64)[None, :] - self.loads

    @property
    def total_regret(self) -> int:
        return int(self.regret.sum())

    @property
    def average_regret(self) -> float:
        return self.total_regret / self.horizon if self.horizon else 0.0

    def final_loads(self) -> np.ndarray:
        return compute_loads(self.final_assignment, self.config.k)


class _Recorder:
    """ラウンドごとの値を集めて Trace にする"""

    def __init__(self, config: SimConfig, phase_length: int):
        self.config = config
        self.phase_length = phase_length
        self.decompose = Decomposer(config.demands, config.gamma, config.algorithm.constants)
        self.bound = exception_bound(config.demands, config.gamma)
        h = config.horizon
        self.regret = np.zeros(h, dtype=np.int64)
        self.exceptions = np.zeros(h, dtype=bool)
        self.changed = np.zeros(h, dtype=np.int64)
        self.r_plus: list = []
        self.r_minus: list = []
        self.rounds: list[int] = []
        self.loads: list[np.ndarray] = []

    def record(self, t: int, loads: np.ndarray, deficits: np.ndarray, changed: int):
        i = t - 1
        self.regret[i] = int(np.abs(deficits).sum())
        self.exceptions[i] = bool((np.abs(deficits) > self.bound).any())
        self.changed[i] = changed
        r_plus, _, r_minus = self.decompose(loads)
        self.r_plus.append(r_plus)
        self.r_minus.append(r_minus)
        if t % self.config.record_every == 0:
            self.rounds.append(t)
            self.loads.append(loads.copy())

    def finish(self, initial: np.ndarray, final: np.ndarray, warnings: list[str]) -> Trace:
        k = self.config.k
        loads = np.array(self.loads, dtype=np.int64).reshape(len(self.loads), k)
        return Trace(
            config=self.config,
            initial_assignment=initial,
            final_assignment=final,
            rounds=np.asarray(self.rounds, dtype=np.int64),
            loads=loads,
            regret=self.regret,
            r_plus=self.r_plus,
            r_minus=self.r_minus,
            exceptions=self.exceptions,
            actions_changed=self.changed,
            phase_length=self.phase_length,
            warnings=warnings,
        )


# ========== 初期割り当て ==========

def initial_assignment(config: SimConfig, ctx: rng.RandomnessContext | None = None) -> np.ndarray:
    """InitialAssignmentSpec から長さ n の割り当てを作る"""
    init = config.initial
    n, k = config.n, config.k
    if init.kind == "explicit":
        return np.asarray(init.assignment, dtype=np.int64).copy()
    if init.kind == "loads":
        tasks = np.repeat(np.arange(1, k + 1), init.loads)
        return np.concatenate([tasks, np.full(n - len(tasks), IDLE)]).astype(np.int64)
    if init.kind == "uniform-random":
        ctx = ctx or rng.RandomnessContext(config.seed, config.round_offset)
        u = ctx.uniforms(0, rng.INITIAL, n)
        return np.floor(u * (k + 1)).astype(np.int64)
    return np.full(n, IDLE, dtype=np.int64)


def _prepare(config: SimConfig) -> list[str]:
    ignore = ("zero horizon",) if config.horizon == 0 else ()
    report = require_valid(config, ignore=ignore)
    for issue in report.warnings:
        log(f"警告: {issue.name}: {issue.message}", level="warning")
    return [f"{i.name}: {i.message}" for i in report.warnings]


# ========== 同期モデル ==========

def run_synchronous(config: SimConfig, vectorized: bool = True, keep_states: bool = False) -> Trace:
    """全アリが毎ラウンド同時に行動する

    vectorized=False では step を1匹ずつ呼ぶ（一括版と同じ乱数を使うので結果は一致する）。
    keep_states=True で最終ラウンド後の各アリの内部状態（to_text）を残す。
    """
    warnings = _prepare(config)
    algorithm = algorithm_for(config)
    if algorithm.sequential:
        raise UnsupportedModelError(f"{algorithm.name} runs only in the sequential model")

    ctx = rng.RandomnessContext(config.seed, config.round_offset)
    n, k = config.n, config.k
    start = initial_assignment(config, ctx)
    recorder = _Recorder(config, algorithm.phase_length)
    log(f"同期実行開始: {algorithm.name} n={n} k={k} horizon={config.horizon} seed={config.seed}", level="debug")

    pop = algorithm.init_population(start)
    states = [algorithm.initial_state(int(a)) for a in start] if not vectorized else None
    assignment = start.copy()
    deficits = deficit(compute_loads(assignment, k), config.demands)

    for t in range(1, config.horizon + 1):
        fb = noise.feedback(config, deficits, ctx, t)
        previous = assignment
        if vectorized:
            u_decide = ctx.uniforms(t, rng.DECIDE, n)
            u_choice = ctx.uniforms(t, rng.CHOICE, n)
            pop = algorithm.step_population(pop, fb.lack, t, u_decide, u_choice)
            assignment = pop.assignment
        else:
            assignment = np.empty(n, dtype=np.int64)
            for i in range(n):
                states[i], assignment[i] = algorithm.step(states[i], fb.row(i), t, ctx.for_ant(t, i, n))
        loads = compute_loads(assignment, k)
        deficits = deficit(loads, config.demands)
        recorder.record(t, loads, deficits, int((assignment != previous).sum()))

    log(f"同期実行終了: 総リグレット={int(recorder.regret.sum())}", level="debug")
    trace = recorder.finish(start, np.asarray(assignment).copy(), warnings)
    if keep_states:
        if vectorized:
            states = [algorithm.population_state(pop, i) for i in range(n)]
        trace.final_states = [s.to_text() for s in states]
    return trace


# ========== 逐次モデル ==========

def run_sequential(config: SimConfig, keep_states: bool = False) -> Trace:
    """毎ラウンド一様に選ばれた1匹だけが前ラウンドのフィードバックで行動する"""
    warnings = _prepare(config)
    algorithm = algorithm_for(config)
    if not algorithm.sequential:
        raise UnsupportedModelError(
            f"{algorithm.name} is phase-based and undefined in the sequential model; use trivial-seq"
        )

    ctx = rng.RandomnessContext(config.seed, config.round_offset)
    n, k = config.n, config.k
    start = initial_assignment(config, ctx)
    recorder = _Recorder(config, algorithm.phase_length)
    log(f"逐次実行開始: n={n} k={k} horizon={config.horizon} seed={config.seed}", level="debug")

    assignment = start.copy()
    loads = compute_loads(assignment, k)
    deficits = deficit(loads, config.demands)

    for t in range(1, config.horizon + 1):
        actor = min(int(ctx.uniforms(t, rng.ACTOR, 1)[0] * n), n - 1)
        fb = noise.feedback(config, deficits, ctx, t)
        state = algorithm.initial_state(int(assignment[actor]))
        _, action = algorithm.step(state, fb.row(actor), t, ctx.for_ant(t, actor, n))
        changed = int(action != assignment[actor])
        assignment[actor] = action
        loads = compute_loads(assignment, k)
        deficits = deficit(loads, config.demands)
        recorder.record(t, loads, deficits, changed)

    trace = recorder.finish(start, assignment.copy(), warnings)
    if keep_states:
        trace.final_states = [algorithm.initial_state(int(a)).to_text() for a in assignment]
    return trace


def run(config: SimConfig, vectorized: bool = True, keep_states: bool = False) -> Trace:
    """アルゴリズムに合うタイミングモデルで実行"""
    if config.algorithm.kind == "trivial-seq":
        return run_sequential(config, keep_states=keep_states)
    return run_synchronous(config, vectorized=vectorized, keep_states=keep_states)


# ========== 再開 ==========

def snapshot_and_resume(trace: Trace, new_demands) -> SimConfig:
    """最終割り当てから新しい需要で続ける設定

    乱数ストリームは round_offset を horizon 分進めて重複させない。
    フェーズ位置は 1 からやり直す。
    """
    return resume_from(trace.config, trace.final_assignment, new_demands)


def resume_from(config: SimConfig, final_assignment, new_demands) -> SimConfig:
    """保存済みの設定と最終割り当てから再開用の設定を作る"""
    demands = tuple(int(d) for d in new_demands)
    if len(demands) != config.k:
        raise DimensionError(f"length mismatch: {len(demands)} demands, k={config.k}")
    if len(final_assignment) != config.n:
        raise DimensionError(f"length mismatch: {len(final_assignment)} ants, n={config.n}")
    return replace(
        config,
        demands=demands,
        initial=InitialAssignmentSpec("explicit", tuple(int(a) for a in final_assignment)),
        round_offset=config.round_offset + config.horizon,
    )


# ========== 出力 ==========

def provenance(config: SimConfig) -> dict:
    from config import config_to_dict
    return {"config": config_to_dict(config), "seed": config.seed}


def write_trace_csv(trace: Trace, path) -> Path:
    """long 形式 CSV（round,task,load,deficit,regret）。先頭の # 行に設定と seed"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = provenance(trace.config)
    deficits = trace.deficits
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# config: {json.dumps(meta['config'], sort_keys=True)}\n")
        f.write(f"# seed: {meta['seed']}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for i, t in enumerate(trace.rounds):
            regret = int(trace.regret[t - 1])
            for j in range(trace.config.k):
                writer.writerow([int(t), j + 1, int(trace.loads[i, j]), int(deficits[i, j]), regret])
    return path


def read_trace_rows(path) -> list[list[str]]:
    """CSV のデータ行（# 行を除く、ヘッダ込み）"""
    with open(path, encoding="utf-8") as f:
        return list(csv.reader(line for line in f if not line.startswith("#")))


def trace_summary(trace: Trace, burn_in: int | None = None) -> dict:
    from metrics import summarize

    gamma_star = None
    if trace.config.noise.kind != "exact" and trace.config.n >= 2:
        gamma_star = noise.critical_value(trace.config.noise, trace.config.demands, trace.config.n)
    summary = provenance(trace.config)
    summary.update(summarize(trace, gamma_star, burn_in))
    summary["gamma_star"] = gamma_star
    summary["horizon"] = trace.horizon
    summary["final_assignment"] = [int(a) for a in trace.final_assignment]
    summary["warnings"] = list(trace.warnings)
    return summary


def write_summary_json(trace: Trace, path, burn_in: int | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(trace_summary(trace, burn_in), f, ensure_ascii=False, indent=2, sort_keys=True)
    return path
