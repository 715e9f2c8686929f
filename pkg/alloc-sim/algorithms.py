"""
アリのアルゴリズム（状態機械）

Ant / Precise Sigmoid / Precise Adversarial / Trivial の4種。
どれも同じインターフェース:

  step(state, feedback_row, round, draws) -> (state, action)      1匹分（純粋関数）
  step_population(pop, lack, round, u_decide, u_choice)           全アリを numpy で一括

draws.uniform(DECIDE) は一時停止・離脱、draws.uniform(CHOICE) は参加先の選択に使う。
一括版は同じ乱数を同じ規則で使うので、1匹ずつ回した結果と一致する。
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from core import IDLE, AlgorithmConstants, AlgorithmSpec, SimConfig
from rng import CHOICE, DECIDE


# ========== パラメータ ==========

@dataclass(frozen=True)
class Params:
    """アルゴリズムの入力（k, γ, ε, 定数）と派生値"""
    k: int
    gamma: Fraction
    epsilon: Fraction = Fraction(1, 2)
    constants: AlgorithmConstants = field(default_factory=AlgorithmConstants)

    @classmethod
    def from_config(cls, config: SimConfig) -> "Params":
        return cls(
            k=config.k,
            gamma=Fraction(str(config.gamma)),
            epsilon=Fraction(str(config.epsilon)),
            constants=config.algorithm.constants,
        )

    # ----- Precise Sigmoid -----
    @property
    def m(self) -> int:
        """窓の長さ m = ceil(2c_χ/ε + 1)"""
        return math.ceil(2 * self.constants.c_chi / self.epsilon + 1)

    # ----- Precise Adversarial -----
    @property
    def r1(self) -> int:
        return math.ceil(self.constants.c_r / self.epsilon)

    @property
    def r2(self) -> int:
        return self.constants.c_replay * self.r1


def _choose(tasks: list[int], u: float) -> int:
    """tasks から一様に1つ（空なら idle）"""
    if not tasks:
        return IDLE
    return tasks[int(u * len(tasks))]


def _choose_population(mask: np.ndarray, u: np.ndarray) -> np.ndarray:
    """各行の True の列から一様に1つ選ぶ（1始まり、なければ 0）"""
    counts = mask.sum(axis=1)
    idx = np.floor(u * counts)
    cums = np.cumsum(mask, axis=1)
    chosen = np.argmax(cums > idx[:, None], axis=1) + 1
    return np.where(counts > 0, chosen, IDLE).astype(np.int64)


def _bits(row) -> str:
    return "".join("L" if x else "O" for x in row)


def _at(matrix: np.ndarray, task: np.ndarray) -> np.ndarray:
    """matrix[i, task[i]-1]（idle の行は False）"""
    n = matrix.shape[0]
    col = np.clip(task - 1, 0, matrix.shape[1] - 1)
    return np.where(task != IDLE, matrix[np.arange(n), col], False)


# ========== Algorithm Ant ==========

@dataclass(frozen=True, order=True)
class AntState:
    """current_task（latch）、1回目のサンプル s1、直前の出力 assignment"""
    current_task: int = IDLE
    sample1: tuple[bool, ...] = ()
    assignment: int = IDLE

    @property
    def paused(self) -> bool:
        return self.current_task != IDLE and self.assignment == IDLE

    def to_text(self) -> str:
        # current|s1|assignment
        return f"{self.current_task}|{_bits(self.sample1)}|{self.assignment}"


def ant_step(state: AntState, feedback_row, round_index: int, params: Params, draws) -> tuple[AntState, int]:
    """2ラウンド1フェーズ。奇数ラウンドで s1 を取り一時停止、偶数ラウンドで参加・離脱"""
    c = params.constants
    row = tuple(bool(x) for x in feedback_row)
    u_decide = draws.uniform(DECIDE)
    u_choice = draws.uniform(CHOICE)

    if round_index % 2 == 1:
        current = state.assignment
        action = current
        if current != IDLE and u_decide < float(c.c_s * params.gamma):
            action = IDLE
        return AntState(current, row, action), action

    current = state.current_task
    s1 = state.sample1
    if current == IDLE:
        underloaded = [j for j in range(1, params.k + 1) if s1[j - 1] and row[j - 1]]
        action = _choose(underloaded, u_choice)
    else:
        action = current
        if not s1[current - 1] and not row[current - 1] and u_decide < float(params.gamma / c.c_d):
            action = IDLE
    return AntState(current, s1, action), action


# ========== Algorithm Precise Sigmoid ==========

@dataclass(frozen=True, order=True)
class PreciseSigmoidState:
    """current_task、2つの窓の lack 回数、直前の出力"""
    current_task: int = IDLE
    count1: tuple[int, ...] = ()
    count2: tuple[int, ...] = ()
    assignment: int = IDLE

    @property
    def paused(self) -> bool:
        return self.current_task != IDLE and self.assignment == IDLE

    def to_text(self) -> str:
        # current|count1|count2|assignment
        c1 = ",".join(map(str, self.count1))
        c2 = ",".join(map(str, self.count2))
        return f"{self.current_task}|{c1}|{c2}|{self.assignment}"


def median_lack(count: int, m: int) -> bool:
    """m 個の二値サンプルの中央値。ちょうど半数は overload 側"""
    return 2 * count > m


def precise_sigmoid_step(state: PreciseSigmoidState, feedback_row, round_index: int, params: Params,
                         draws) -> tuple[PreciseSigmoidState, int]:
    """長さ 2m のフェーズ。各窓の中央値を Ant の2サンプルとして使う"""
    c = params.constants
    m = params.m
    k = params.k
    r = round_index % (2 * m)
    row = tuple(int(bool(x)) for x in feedback_row)
    u_decide = draws.uniform(DECIDE)
    u_choice = draws.uniform(CHOICE)

    current, count1, count2, action = state.current_task, state.count1, state.count2, state.assignment
    if r == 1:
        current = state.assignment
        count1 = (0,) * k
        count2 = (0,) * k

    if 1 <= r <= m:
        count1 = tuple(a + b for a, b in zip(count1, row))
        if r == m and current != IDLE:
            action = current
            if u_decide < float(params.epsilon * c.c_s * params.gamma / c.c_chi):
                action = IDLE
        return PreciseSigmoidState(current, count1, count2, action), action

    count2 = tuple(a + b for a, b in zip(count2, row))
    if r == 0:
        s1 = [median_lack(x, m) for x in count1]
        s2 = [median_lack(x, m) for x in count2]
        if current == IDLE:
            underloaded = [j for j in range(1, k + 1) if s1[j - 1] and s2[j - 1]]
            action = _choose(underloaded, u_choice)
        else:
            action = current
            both_overload = not s1[current - 1] and not s2[current - 1]
            if both_overload and u_decide < float(params.gamma / (c.c_chi * c.c_d)):
                action = IDLE
    return PreciseSigmoidState(current, count1, count2, action), action


# ========== Algorithm Precise Adversarial ==========

@dataclass(frozen=True, order=True)
class PreciseAdversarialState:
    """current_task、r_min（0 は未確定）、r_min 時点の割り当て、全サンプル lack/overload、直前の出力"""
    current_task: int = IDLE
    r_min: int = 0
    at_r_min: int = IDLE
    all_lack: tuple[bool, ...] = ()
    all_overload: tuple[bool, ...] = ()
    assignment: int = IDLE

    @property
    def paused(self) -> bool:
        return self.current_task != IDLE and self.assignment == IDLE

    def to_text(self) -> str:
        # current|r_min|at_r_min|all_lack|all_overload|assignment
        return (f"{self.current_task}|{self.r_min}|{self.at_r_min}|"
                f"{_bits(self.all_lack)}|{_bits(self.all_overload)}|{self.assignment}")


def precise_adversarial_step(state: PreciseAdversarialState, feedback_row, round_index: int, params: Params,
                             draws) -> tuple[PreciseAdversarialState, int]:
    """長さ r1+r2 のフェーズ。最初に lack を受けた時の割り当てを後半で再生する"""
    c = params.constants
    r1, r2 = params.r1, params.r2
    k = params.k
    r = round_index % (r1 + r2)
    row = tuple(bool(x) for x in feedback_row)
    u_decide = draws.uniform(DECIDE)
    u_choice = draws.uniform(CHOICE)
    p = float(params.epsilon * params.gamma / c.c_r)

    if r == 1:
        current = state.assignment
        all_lack = row
        all_overload = tuple(not x for x in row)
        r_min, at_r_min = 0, IDLE
        action = current
        if current != IDLE and row[current - 1]:
            r_min, at_r_min = 1, action
        return PreciseAdversarialState(current, r_min, at_r_min, all_lack, all_overload, action), action

    current = state.current_task
    r_min, at_r_min = state.r_min, state.at_r_min
    all_lack = tuple(a and x for a, x in zip(state.all_lack, row))
    all_overload = tuple(a and not x for a, x in zip(state.all_overload, row))

    if 2 <= r < r1:
        action = current
        if current != IDLE and u_decide < p:
            action = IDLE
        if current != IDLE and r_min == 0 and row[current - 1]:
            r_min, at_r_min = r, action
    elif r == r1:
        # r_min は r1 より前のサンプルだけで決まる
        if current != IDLE and r_min == 0:
            r_min, at_r_min = r1, current
        action = IDLE if current == IDLE or at_r_min == IDLE else current
    elif r != 0:
        action = at_r_min if current != IDLE else IDLE
    else:
        if current == IDLE:
            underloaded = [j for j in range(1, k + 1) if all_lack[j - 1]]
            action = _choose(underloaded, u_choice)
        else:
            action = current
            if all_overload[current - 1] and u_decide < p:
                action = IDLE
    return PreciseAdversarialState(current, r_min, at_r_min, all_lack, all_overload, action), action


# ========== Trivial ==========

@dataclass(frozen=True, order=True)
class TrivialState:
    current_task: int = IDLE

    @property
    def assignment(self) -> int:
        return self.current_task

    def to_text(self) -> str:
        return str(self.current_task)


def trivial_step(state: TrivialState, feedback_row, params: Params, draws) -> tuple[TrivialState, int]:
    """待機中なら lack のタスクに一様に参加、作業中なら overload で離脱"""
    row = tuple(bool(x) for x in feedback_row)
    u_choice = draws.uniform(CHOICE)
    current = state.current_task
    if current == IDLE:
        action = _choose([j for j in range(1, params.k + 1) if row[j - 1]], u_choice)
    else:
        action = IDLE if not row[current - 1] else current
    return TrivialState(action), action


# ========== 一括実行（numpy） ==========

@dataclass
class Population:
    """全アリの状態を列ごとに持つ"""
    assignment: np.ndarray
    current: np.ndarray
    arrays: dict[str, np.ndarray] = field(default_factory=dict)


class Algorithm:
    """AgentInterface: step / step_population / phase_length"""
    name = ""
    phase_length = 1
    sequential = False

    def __init__(self, params: Params):
        self.params = params

    def initial_state(self, assignment: int):
        raise NotImplementedError

    def step(self, state, feedback_row, round_index: int, draws):
        raise NotImplementedError

    def init_population(self, assignment: np.ndarray) -> Population:
        a = np.asarray(assignment, dtype=np.int64).copy()
        return Population(a, a.copy())

    def step_population(self, pop: Population, lack: np.ndarray, round_index: int,
                        u_decide: np.ndarray, u_choice: np.ndarray) -> Population:
        raise NotImplementedError

    def population_state(self, pop: Population, i: int):
        """一括状態から i 番目のアリの状態を取り出す"""
        raise NotImplementedError


class AntAlgorithm(Algorithm):
    name = "ant"
    phase_length = 2

    def initial_state(self, assignment: int) -> AntState:
        return AntState(IDLE, (False,) * self.params.k, assignment)

    def step(self, state, feedback_row, round_index, draws):
        return ant_step(state, feedback_row, round_index, self.params, draws)

    def init_population(self, assignment):
        pop = super().init_population(assignment)
        pop.current[:] = IDLE
        pop.arrays["sample1"] = np.zeros((len(pop.assignment), self.params.k), dtype=bool)
        return pop

    def step_population(self, pop, lack, round_index, u_decide, u_choice):
        c = self.params.constants
        if round_index % 2 == 1:
            pop.current = pop.assignment.copy()
            pop.arrays["sample1"] = lack.copy()
            pause = (pop.current != IDLE) & (u_decide < float(c.c_s * self.params.gamma))
            pop.assignment = np.where(pause, IDLE, pop.current)
            return pop

        s1 = pop.arrays["sample1"]
        idle = pop.current == IDLE
        joined = _choose_population(s1 & lack, u_choice)
        both_overload = _at(~s1 & ~lack, pop.current)
        leave = ~idle & both_overload & (u_decide < float(self.params.gamma / c.c_d))
        pop.assignment = np.where(idle, joined, np.where(leave, IDLE, pop.current))
        return pop

    def population_state(self, pop, i):
        s1 = tuple(bool(x) for x in pop.arrays["sample1"][i])
        return AntState(int(pop.current[i]), s1, int(pop.assignment[i]))


class PreciseSigmoidAlgorithm(Algorithm):
    name = "precise-sigmoid"

    def __init__(self, params):
        super().__init__(params)
        self.phase_length = 2 * params.m

    def initial_state(self, assignment: int) -> PreciseSigmoidState:
        zeros = (0,) * self.params.k
        return PreciseSigmoidState(IDLE, zeros, zeros, assignment)

    def step(self, state, feedback_row, round_index, draws):
        return precise_sigmoid_step(state, feedback_row, round_index, self.params, draws)

    def init_population(self, assignment):
        pop = super().init_population(assignment)
        pop.current[:] = IDLE
        shape = (len(pop.assignment), self.params.k)
        pop.arrays["count1"] = np.zeros(shape, dtype=np.int32)
        pop.arrays["count2"] = np.zeros(shape, dtype=np.int32)
        return pop

    def step_population(self, pop, lack, round_index, u_decide, u_choice):
        c = self.params.constants
        m = self.params.m
        r = round_index % (2 * m)
        if r == 1:
            pop.current = pop.assignment.copy()
            pop.arrays["count1"][:] = 0
            pop.arrays["count2"][:] = 0

        if 1 <= r <= m:
            pop.arrays["count1"] += lack
            if r == m:
                p = float(self.params.epsilon * c.c_s * self.params.gamma / c.c_chi)
                working = pop.current != IDLE
                pause = working & (u_decide < p)
                pop.assignment = np.where(working, np.where(pause, IDLE, pop.current), pop.assignment)
            return pop

        pop.arrays["count2"] += lack
        if r == 0:
            s1 = 2 * pop.arrays["count1"] > m
            s2 = 2 * pop.arrays["count2"] > m
            idle = pop.current == IDLE
            joined = _choose_population(s1 & s2, u_choice)
            both_overload = _at(~s1 & ~s2, pop.current)
            leave = ~idle & both_overload & (u_decide < float(self.params.gamma / (c.c_chi * c.c_d)))
            pop.assignment = np.where(idle, joined, np.where(leave, IDLE, pop.current))
        return pop

    def population_state(self, pop, i):
        return PreciseSigmoidState(
            int(pop.current[i]),
            tuple(int(x) for x in pop.arrays["count1"][i]),
            tuple(int(x) for x in pop.arrays["count2"][i]),
            int(pop.assignment[i]),
        )


class PreciseAdversarialAlgorithm(Algorithm):
    name = "precise-adversarial"

    def __init__(self, params):
        super().__init__(params)
        self.phase_length = params.r1 + params.r2

    def initial_state(self, assignment: int) -> PreciseAdversarialState:
        k = self.params.k
        return PreciseAdversarialState(IDLE, 0, IDLE, (False,) * k, (False,) * k, assignment)

    def step(self, state, feedback_row, round_index, draws):
        return precise_adversarial_step(state, feedback_row, round_index, self.params, draws)

    def init_population(self, assignment):
        pop = super().init_population(assignment)
        n, k = len(pop.assignment), self.params.k
        pop.current[:] = IDLE
        pop.arrays["r_min"] = np.zeros(n, dtype=np.int64)
        pop.arrays["at_r_min"] = np.zeros(n, dtype=np.int64)
        pop.arrays["all_lack"] = np.zeros((n, k), dtype=bool)
        pop.arrays["all_overload"] = np.zeros((n, k), dtype=bool)
        return pop

    def step_population(self, pop, lack, round_index, u_decide, u_choice):
        c = self.params.constants
        r1, r2 = self.params.r1, self.params.r2
        r = round_index % (r1 + r2)
        p = float(self.params.epsilon * self.params.gamma / c.c_r)
        arr = pop.arrays

        if r == 1:
            pop.current = pop.assignment.copy()
            arr["all_lack"] = lack.copy()
            arr["all_overload"] = ~lack
            found = _at(lack, pop.current)
            arr["r_min"] = np.where(found, 1, 0)
            arr["at_r_min"] = np.where(found, pop.current, IDLE)
            pop.assignment = pop.current.copy()
            return pop

        arr["all_lack"] = arr["all_lack"] & lack
        arr["all_overload"] = arr["all_overload"] & ~lack
        working = pop.current != IDLE

        if 2 <= r < r1:
            pause = working & (u_decide < p)
            action = np.where(pause, IDLE, pop.current)
            found = working & (arr["r_min"] == 0) & _at(lack, pop.current)
            arr["r_min"] = np.where(found, r, arr["r_min"])
            arr["at_r_min"] = np.where(found, action, arr["at_r_min"])
            pop.assignment = action
        elif r == r1:
            missing = working & (arr["r_min"] == 0)
            arr["r_min"] = np.where(missing, r1, arr["r_min"])
            arr["at_r_min"] = np.where(missing, pop.current, arr["at_r_min"])
            pop.assignment = np.where(working & (arr["at_r_min"] != IDLE), pop.current, IDLE)
        elif r != 0:
            pop.assignment = np.where(working, arr["at_r_min"], IDLE)
        else:
            joined = _choose_population(arr["all_lack"], u_choice)
            leave = working & _at(arr["all_overload"], pop.current) & (u_decide < p)
            pop.assignment = np.where(~working, joined, np.where(leave, IDLE, pop.current))
        return pop

    def population_state(self, pop, i):
        arr = pop.arrays
        return PreciseAdversarialState(
            int(pop.current[i]),
            int(arr["r_min"][i]),
            int(arr["at_r_min"][i]),
            tuple(bool(x) for x in arr["all_lack"][i]),
            tuple(bool(x) for x in arr["all_overload"][i]),
            int(pop.assignment[i]),
        )


class TrivialAlgorithm(Algorithm):
    name = "trivial-sync"
    phase_length = 1

    def initial_state(self, assignment: int) -> TrivialState:
        return TrivialState(assignment)

    def step(self, state, feedback_row, round_index, draws):
        return trivial_step(state, feedback_row, self.params, draws)

    def step_population(self, pop, lack, round_index, u_decide, u_choice):
        idle = pop.assignment == IDLE
        joined = _choose_population(lack, u_choice)
        stays = _at(lack, pop.assignment)
        pop.assignment = np.where(idle, joined, np.where(stays, pop.assignment, IDLE))
        pop.current = pop.assignment.copy()
        return pop

    def population_state(self, pop, i):
        return TrivialState(int(pop.assignment[i]))


class TrivialSequentialAlgorithm(TrivialAlgorithm):
    name = "trivial-seq"
    sequential = True


ALGORITHMS = {
    "ant": AntAlgorithm,
    "precise-sigmoid": PreciseSigmoidAlgorithm,
    "precise-adversarial": PreciseAdversarialAlgorithm,
    "trivial-sync": TrivialAlgorithm,
    "trivial-seq": TrivialSequentialAlgorithm,
}


def make_algorithm(spec: AlgorithmSpec, params: Params) -> Algorithm:
    return ALGORITHMS[spec.kind](params)


def algorithm_for(config: SimConfig) -> Algorithm:
    return make_algorithm(config.algorithm, Params.from_config(config))


def with_constants(spec: AlgorithmSpec, **overrides) -> AlgorithmSpec:
    """定数を一部差し替えた AlgorithmSpec"""
    return replace(spec, constants=replace(spec.constants, **overrides))
