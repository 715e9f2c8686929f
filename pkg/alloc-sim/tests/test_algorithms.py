"""
アルゴリズムの状態機械テスト

1匹分の step（FixedDraws で分岐を固定）、一括版 step_population との一致、
一括版の分岐頻度（10^6 匹、5σ）を確認する。
"""
import math
from fractions import Fraction

import numpy as np
import pytest

import rng
from algorithms import (
    ALGORITHMS,
    AlgorithmConstants,
    AntState,
    Params,
    PreciseAdversarialState,
    PreciseSigmoidState,
    TrivialState,
    ant_step,
    median_lack,
    precise_adversarial_step,
    precise_sigmoid_step,
    trivial_step,
)
from core import IDLE

GAMMA = Fraction(1, 20)
SMALL_SIGMOID = AlgorithmConstants(c_chi=Fraction(1, 2))
SMALL_ADVERSARIAL = AlgorithmConstants(c_r=Fraction(3), c_replay=1)


def params(k=1, gamma=GAMMA, epsilon=Fraction(1), constants=None):
    return Params(k=k, gamma=gamma, epsilon=epsilon, constants=constants or AlgorithmConstants())


# ========== パラメータ ==========

def test_derived_phase_lengths():
    p = params()
    assert p.m == math.ceil(2 * 10 + 1)
    assert p.r1 == 32 and p.r2 == 128
    assert params(constants=SMALL_SIGMOID).m == 2
    q = params(constants=SMALL_ADVERSARIAL)
    assert (q.r1, q.r2) == (3, 3)


def test_derived_phase_lengths_at_default_constants():
    p = params(epsilon=Fraction(1, 2))
    assert p.m == 41
    assert ALGORITHMS["precise-sigmoid"](p).phase_length == 82
    q = params(epsilon=Fraction(1, 4))
    assert (q.r1, q.r2) == (128, 512)
    assert ALGORITHMS["precise-adversarial"](q).phase_length == 640


def test_median_lack_ties_go_to_overload():
    assert median_lack(1, 2) is False
    assert median_lack(21, 41) is True
    assert median_lack(20, 41) is False
    assert median_lack(2, 3) is True
    assert median_lack(0, 5) is False


# ========== Ant ==========

def test_ant_pauses_at_odd_round():
    state = AntState(IDLE, (False,), 1)
    paused, action = ant_step(state, (True,), 1, params(), rng.FixedDraws(decide=0.0))
    assert action == IDLE
    assert paused.current_task == 1 and paused.paused
    kept, action = ant_step(state, (True,), 1, params(), rng.FixedDraws(decide=0.99))
    assert action == 1 and kept.sample1 == (True,)


def test_paused_ant_resumes_at_even_round():
    state = AntState(1, (True,), IDLE)
    _, action = ant_step(state, (False,), 2, params(), rng.FixedDraws(decide=0.0))
    assert action == 1


def test_ant_leaves_only_on_two_overloads():
    p = params()
    _, action = ant_step(AntState(1, (False,), 1), (False,), 2, p, rng.FixedDraws(decide=0.0))
    assert action == IDLE
    _, action = ant_step(AntState(1, (True,), 1), (False,), 2, p, rng.FixedDraws(decide=0.0))
    assert action == 1
    # 確率 γ/c_d を超える乱数では残る
    _, action = ant_step(AntState(1, (False,), 1), (False,), 2, p, rng.FixedDraws(decide=0.01))
    assert action == 1


def test_idle_ant_joins_uniformly_among_two_lack_tasks():
    p = params(k=3)
    state = AntState(IDLE, (True, False, True), IDLE)
    _, first = ant_step(state, (True, True, True), 2, p, rng.FixedDraws(choice=0.2))
    _, second = ant_step(state, (True, True, True), 2, p, rng.FixedDraws(choice=0.7))
    assert (first, second) == (1, 3)
    _, none = ant_step(state, (False, True, False), 2, p, rng.FixedDraws(choice=0.2))
    assert none == IDLE


def test_ant_state_text():
    assert AntState(2, (True, False), IDLE).to_text() == "2|LO|0"


# ========== Precise Sigmoid ==========

def test_precise_sigmoid_joins_after_full_phase():
    p = params(constants=SMALL_SIGMOID)
    state = PreciseSigmoidState(IDLE, (0,), (0,), IDLE)
    actions = []
    for t in range(1, 5):
        state, action = precise_sigmoid_step(state, (True,), t, p, rng.FixedDraws())
        actions.append(action)
    assert actions == [IDLE, IDLE, IDLE, 1]
    assert state.count1 == (2,) and state.count2 == (2,)
    assert state.to_text() == "0|2|2|1"


def test_precise_sigmoid_leaves_on_two_overload_medians():
    p = params(gamma=Fraction(1, 10), constants=SMALL_SIGMOID)
    state = PreciseSigmoidState(IDLE, (0,), (0,), 1)
    rows = [(True,), (False,), (False,), (False,)]
    actions = []
    for t, row in enumerate(rows, start=1):
        state, action = precise_sigmoid_step(state, row, t, p, rng.FixedDraws(decide=0.99))
        actions.append(action)
    # 1勝1敗は overload 扱い、確率 0.99 は離脱確率を超えるので残る
    assert actions == [1, 1, 1, 1]
    state = PreciseSigmoidState(IDLE, (0,), (0,), 1)
    for t, row in enumerate(rows, start=1):
        state, action = precise_sigmoid_step(state, row, t, p, rng.FixedDraws(decide=0.0))
    assert action == IDLE


# ========== Precise Adversarial ==========

def test_precise_adversarial_replays_assignment_at_first_lack():
    p = params(gamma=Fraction(3, 10), constants=SMALL_ADVERSARIAL)
    state = PreciseAdversarialState(IDLE, 0, IDLE, (False,), (False,), 1)
    rows = [(False,), (True,), (False,), (False,), (False,), (False,)]
    actions = []
    for t, row in enumerate(rows, start=1):
        state, action = precise_adversarial_step(state, row, t, p, rng.FixedDraws(decide=0.0))
        actions.append(action)
    # ラウンド2で一時停止中に初めて lack、以降はその割り当て（idle）を再生
    assert actions[:5] == [1, IDLE, IDLE, IDLE, IDLE]
    assert state.r_min == 2 and state.at_r_min == IDLE
    # 全サンプル overload ではないので離脱しない
    assert actions[5] == 1


def test_precise_adversarial_without_lack_replays_current_and_may_leave():
    p = params(gamma=Fraction(3, 10), constants=SMALL_ADVERSARIAL)
    state = PreciseAdversarialState(IDLE, 0, IDLE, (False,), (False,), 1)
    actions = []
    for t in range(1, 7):
        state, action = precise_adversarial_step(state, (False,), t, p, rng.FixedDraws(decide=0.0))
        actions.append(action)
    assert actions == [1, IDLE, 1, 1, 1, IDLE]
    assert state.r_min == 3
    assert state.to_text() == "1|3|1|O|L|0"


def test_precise_adversarial_idle_joins_all_lack_task():
    p = params(k=2, constants=SMALL_ADVERSARIAL)
    state = PreciseAdversarialState(IDLE, 0, IDLE, (False, False), (False, False), IDLE)
    for t in range(1, 7):
        state, action = precise_adversarial_step(state, (False, True), t, p, rng.FixedDraws())
    assert action == 2


# ========== Trivial ==========

def test_trivial_step():
    p = params(k=2)
    _, action = trivial_step(TrivialState(IDLE), (False, True), p, rng.FixedDraws(choice=0.9))
    assert action == 2
    _, action = trivial_step(TrivialState(1), (False, True), p, rng.FixedDraws())
    assert action == IDLE
    _, action = trivial_step(TrivialState(1), (True, True), p, rng.FixedDraws())
    assert action == 1


# ========== 一括版と1匹版の一致 ==========

EQUIVALENCE_CASES = [
    ("ant", params(k=2, gamma=Fraction(3, 10))),
    ("precise-sigmoid", params(k=2, gamma=Fraction(3, 10), constants=SMALL_SIGMOID)),
    ("precise-adversarial", params(k=2, gamma=Fraction(3, 10), constants=SMALL_ADVERSARIAL)),
    ("trivial-sync", params(k=2)),
]


@pytest.mark.parametrize("kind,p", EQUIVALENCE_CASES, ids=[c[0] for c in EQUIVALENCE_CASES])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_population_matches_per_ant_steps(kind, p, seed):
    gen = np.random.default_rng(seed)
    n = 60
    algo = ALGORITHMS[kind](p)
    assignment = gen.integers(0, p.k + 1, size=n)
    pop = algo.init_population(assignment)
    states = [algo.initial_state(int(a)) for a in assignment]
    for t in range(1, 13):
        lack = gen.random((n, p.k)) < 0.5
        u_decide = gen.random(n)
        u_choice = gen.random(n)
        pop = algo.step_population(pop, lack, t, u_decide, u_choice)
        for i in range(n):
            draws = rng.FixedDraws(decide=float(u_decide[i]), choice=float(u_choice[i]))
            states[i], action = algo.step(states[i], lack[i], t, draws)
            assert action == pop.assignment[i]
            assert algo.population_state(pop, i) == states[i], (t, i)


# ========== 一括版の分岐頻度 ==========

N_FREQ = 1_000_000


def _within(observed_count, n, p):
    return abs(observed_count / n - p) < 5 * math.sqrt(p * (1 - p) / n)


def _uniforms(seed, round_index, n=N_FREQ):
    ctx = rng.RandomnessContext(seed)
    return ctx.uniforms(round_index, rng.DECIDE, n), ctx.uniforms(round_index, rng.CHOICE, n)


def test_ant_pause_frequency():
    p = params()
    algo = ALGORITHMS["ant"](p)
    pop = algo.init_population(np.ones(N_FREQ, dtype=np.int64))
    u_decide, u_choice = _uniforms(1, 1)
    pop = algo.step_population(pop, np.ones((N_FREQ, 1), dtype=bool), 1, u_decide, u_choice)
    assert _within(int((pop.assignment == IDLE).sum()), N_FREQ, float(p.constants.c_s * p.gamma))


def test_ant_leave_frequency():
    p = params()
    algo = ALGORITHMS["ant"](p)
    pop = algo.init_population(np.ones(N_FREQ, dtype=np.int64))
    pop.current[:] = 1
    lack = np.zeros((N_FREQ, 1), dtype=bool)
    u_decide, u_choice = _uniforms(2, 2)
    pop = algo.step_population(pop, lack, 2, u_decide, u_choice)
    assert _within(int((pop.assignment == IDLE).sum()), N_FREQ, float(p.gamma / p.constants.c_d))


def test_precise_sigmoid_pause_frequency():
    p = params(gamma=Fraction(1, 10), constants=SMALL_SIGMOID)
    algo = ALGORITHMS["precise-sigmoid"](p)
    pop = algo.init_population(np.ones(N_FREQ, dtype=np.int64))
    lack = np.ones((N_FREQ, 1), dtype=bool)
    for t in (1, 2):
        u_decide, u_choice = _uniforms(3, t)
        pop = algo.step_population(pop, lack, t, u_decide, u_choice)
    c = p.constants
    assert _within(int((pop.assignment == IDLE).sum()), N_FREQ, float(p.epsilon * c.c_s * p.gamma / c.c_chi))


def test_precise_adversarial_leave_frequency():
    p = params(gamma=Fraction(1, 2), constants=SMALL_ADVERSARIAL)
    algo = ALGORITHMS["precise-adversarial"](p)
    pop = algo.init_population(np.ones(N_FREQ, dtype=np.int64))
    lack = np.zeros((N_FREQ, 1), dtype=bool)
    for t in range(1, 7):
        u_decide, u_choice = _uniforms(4, t)
        pop = algo.step_population(pop, lack, t, u_decide, u_choice)
    assert _within(int((pop.assignment == IDLE).sum()), N_FREQ, float(p.epsilon * p.gamma / p.constants.c_r))


def test_join_choice_is_uniform():
    k = 4
    algo = ALGORITHMS["trivial-sync"](params(k=k))
    pop = algo.init_population(np.zeros(N_FREQ, dtype=np.int64))
    u_decide, u_choice = _uniforms(5, 1)
    pop = algo.step_population(pop, np.ones((N_FREQ, k), dtype=bool), 1, u_decide, u_choice)
    counts = np.bincount(pop.assignment, minlength=k + 1)
    assert counts[0] == 0
    for j in range(1, k + 1):
        assert _within(int(counts[j]), N_FREQ, 1 / k)


def test_precise_sigmoid_leave_frequency():
    p = params(gamma=Fraction(1, 10), constants=SMALL_SIGMOID)
    algo = ALGORITHMS["precise-sigmoid"](p)
    pop = algo.init_population(np.ones(N_FREQ, dtype=np.int64))
    lack = np.zeros((N_FREQ, 1), dtype=bool)
    for t in range(1, 5):
        u_decide, u_choice = _uniforms(6, t)
        pop = algo.step_population(pop, lack, t, u_decide, u_choice)
    # 一時停止していたアリもフェーズ末には current に戻るか離脱する
    c = p.constants
    assert (pop.current == 1).all()
    assert _within(int((pop.assignment == IDLE).sum()), N_FREQ, float(p.gamma / (c.c_chi * c.c_d)))


def test_precise_adversarial_pauses_independently_each_round():
    p = params(gamma=Fraction(1, 2))
    pause = float(p.epsilon * p.gamma / p.constants.c_r)
    assert pause == 1 / 64
    algo = ALGORITHMS["precise-adversarial"](p)
    pop = algo.init_population(np.ones(N_FREQ, dtype=np.int64))
    lack = np.zeros((N_FREQ, 1), dtype=bool)
    idle = {}
    for t in (1, 2, 3):
        u_decide, u_choice = _uniforms(7, t)
        pop = algo.step_population(pop, lack, t, u_decide, u_choice)
        idle[t] = pop.assignment == IDLE
    assert not idle[1].any()
    assert _within(int(idle[2].sum()), N_FREQ, pause)
    assert _within(int(idle[3].sum()), N_FREQ, pause)
    assert _within(int((idle[2] & idle[3]).sum()), N_FREQ, pause ** 2)


# ========== 状態機械の性質 ==========

def _random_run(kind, p, seed, n=400, phases=3):
    """ランダムなフィードバックで一括版を回し、各ラウンドの (algo, 前の割り当て, 新しい割り当て, pop) を返す"""
    gen = np.random.default_rng(seed)
    algo = ALGORITHMS[kind](p)
    pop = algo.init_population(gen.integers(0, p.k + 1, size=n))
    for t in range(1, phases * algo.phase_length + 1):
        before = pop.assignment.copy()
        pop = algo.step_population(pop, gen.random((n, p.k)) < 0.5, t, gen.random(n), gen.random(n))
        yield algo, before, pop.assignment.copy(), pop


@pytest.mark.parametrize("kind,p", EQUIVALENCE_CASES, ids=[c[0] for c in EQUIVALENCE_CASES])
def test_no_direct_switch_between_tasks(kind, p):
    for _, before, after, _ in _random_run(kind, p, seed=8):
        switched = (before != IDLE) & (after != IDLE) & (before != after)
        assert not switched.any()


def _text_bound(p):
    width = len(str(max(p.m, p.r1)))
    return 3 * len(str(p.k)) + 2 * p.k * (width + 1) + 5


@pytest.mark.parametrize("kind,p", EQUIVALENCE_CASES, ids=[c[0] for c in EQUIVALENCE_CASES])
def test_state_size_does_not_depend_on_population(kind, p):
    for algo, _, _, pop in _random_run(kind, p, seed=9, n=50):
        for i in range(len(pop.assignment)):
            state = algo.population_state(pop, i)
            assert len(state.to_text()) <= _text_bound(p)
            for name in ("count1", "count2", "sample1", "all_lack", "all_overload"):
                if hasattr(state, name):
                    assert len(getattr(state, name)) == p.k
            if kind == "precise-sigmoid":
                assert max(state.count1 + state.count2) <= p.m
            if kind == "precise-adversarial":
                assert 0 <= state.r_min <= p.r1
                assert 0 <= state.at_r_min <= p.k
