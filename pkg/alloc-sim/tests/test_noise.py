import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.special import expit

import noise
import rng
from conftest import make_config
from core import AdversaryStrategy, NoiseSpec


# ========== 臨界値 ==========

def test_critical_value_meets_its_definition():
    n, demands, lam = 100, (25, 40), 30.0
    g = noise.critical_value(lam, demands, n)
    assert noise.sigmoid(-g * min(demands), lam) <= n ** -8
    # 相対 1e-6 小さければ条件を外れる
    assert noise.sigmoid(-g * (1 - 1e-6) * min(demands), lam) > n ** -8
    assert g == pytest.approx(math.log(n ** 8 - 1) / (lam * 25))


@pytest.mark.parametrize("demands,expected", [((100,), 0.221807), ((100, 50), 0.443614)])
def test_critical_value_worked_values(demands, expected):
    # λ=1, n=16 なら ln(16^8 - 1) / min d
    g = noise.critical_value(1.0, demands, 16)
    assert g == pytest.approx(expected, abs=1e-6)
    for d in demands:
        assert noise.sigmoid(-g * d, 1.0) <= 16 ** -8
    assert noise.sigmoid(-g * (1 - 1e-6) * min(demands), 1.0) > 16 ** -8


def test_critical_value_by_noise_kind():
    assert noise.critical_value(NoiseSpec(kind="adversarial", gamma_ad=0.03), (10,), 50) == 0.03
    assert noise.critical_value(NoiseSpec(kind="exact"), (10,), 50) == 0.0


def test_critical_value_rejects_bad_lambda():
    with pytest.raises(ValueError):
        noise.critical_value(0.0, (10,), 50)


def test_lambda_for_critical_inverts_critical_value():
    lam = noise.lambda_for_critical(0.25, (500,), 2000)
    assert noise.critical_value(lam, (500,), 2000) == pytest.approx(0.25)


def test_sigmoid_is_stable_for_large_arguments():
    assert noise.sigmoid(0, 5.0) == 0.5
    assert noise.sigmoid(1e6, 1.0) == 1.0
    assert noise.sigmoid(-1e6, 1.0) == 0.0
    assert noise.sigmoid(-2, 1.0) == pytest.approx(1 - noise.sigmoid(2, 1.0))


def test_sigmoid_at_log_three():
    assert noise.sigmoid(1, math.log(3)) == pytest.approx(0.75, abs=1e-12)


def test_sigmoid_is_scaled_expit():
    x = np.array([-40.0, -1.5, 0.0, 0.25, 3.0])
    assert np.array_equal(noise.sigmoid(x, 2.5), expit(2.5 * x))
    assert isinstance(noise.sigmoid(0.25, 2.5), float)


def test_grey_zone_contains():
    zone = noise.grey_zone((100, 40), 0.1)
    assert zone.intervals() == [(-10.0, 10.0), (-4.0, 4.0)]
    assert zone.contains([10, -5]).tolist() == [True, False]


# ========== シグモイドフィードバック ==========

def test_sigmoid_feedback_frequency():
    n = 200_000
    ctx = rng.RandomnessContext(11)
    fb = noise.sample_feedback_sigmoid(np.array([0, 2]), 1.0, ctx, 3, n)
    assert fb.shape == (n, 2)
    freq = fb.lack.mean(axis=0)
    for observed, p in zip(freq, [0.5, noise.sigmoid(2, 1.0)]):
        assert abs(observed - p) < 5 * math.sqrt(p * (1 - p) / n)


def test_sigmoid_feedback_is_reproducible():
    ctx = rng.RandomnessContext(4)
    a = noise.sample_feedback_sigmoid(np.array([1, -1]), 0.5, ctx, 8, 300)
    b = noise.sample_feedback_sigmoid(np.array([1, -1]), 0.5, rng.RandomnessContext(4), 8, 300)
    assert np.array_equal(a.lack, b.lack)


def test_correlated_feedback_is_shared_by_all_ants():
    ctx = rng.RandomnessContext(4)
    fb = noise.sample_feedback_sigmoid(np.array([0, 0, 0]), 1.0, ctx, 1, 50, correlated=True)
    assert (fb.lack == fb.lack[0]).all()


def test_exact_feedback():
    fb = noise.exact_feedback(np.array([0, -1, 3]), 1, 4)
    assert fb.row(2) == (True, False, True)


# ========== 敵対的フィードバック ==========

@pytest.mark.parametrize("kind", ["all-lack-in-grey", "all-overload-in-grey", "per-ant-alternating",
                                  "correct-outside-random-inside"])
def test_adversary_is_correct_outside_grey_zone(kind):
    ctx = rng.RandomnessContext(0)
    demands = (100, 100)
    strategy = AdversaryStrategy(kind=kind, p=0.5)
    fb = noise.adversarial_feedback(np.array([6, -6]), demands, 0.05, strategy, ctx, 1, 20)
    assert fb.lack[:, 0].all()
    assert not fb.lack[:, 1].any()


def test_adversary_controls_grey_zone():
    ctx = rng.RandomnessContext(0)
    d = np.array([5, -5])
    lack = noise.adversarial_feedback(d, (100, 100), 0.05, AdversaryStrategy("all-lack-in-grey"), ctx, 1, 3)
    over = noise.adversarial_feedback(d, (100, 100), 0.05, AdversaryStrategy("all-overload-in-grey"), ctx, 1, 3)
    assert lack.lack.all()
    assert not over.lack.any()


def test_alternating_adversary_flips_per_ant_and_round():
    ctx = rng.RandomnessContext(0)
    strategy = AdversaryStrategy("per-ant-alternating")
    r1 = noise.adversarial_feedback(np.array([0]), (100,), 0.05, strategy, ctx, 1, 4)
    r2 = noise.adversarial_feedback(np.array([0]), (100,), 0.05, strategy, ctx, 2, 4)
    assert r1.lack[:, 0].tolist() == [False, True, False, True]
    assert r2.lack[:, 0].tolist() == [True, False, True, False]


def test_random_inside_flip_rate():
    ctx = rng.RandomnessContext(2)
    n = 100_000
    strategy = AdversaryStrategy("correct-outside-random-inside", p=0.3)
    fb = noise.adversarial_feedback(np.array([1]), (100,), 0.05, strategy, ctx, 1, n)
    # Δ >= 0 の正解は lack、確率 p で反転
    assert abs((~fb.lack).mean() - 0.3) < 5 * math.sqrt(0.21 / n)


def test_indistinguishability_pairs_give_identical_feedback():
    ctx = rng.RandomnessContext(0)
    gamma_ad = 0.05
    base = AdversaryStrategy("indistinguishability", shifted=False)
    shifted = AdversaryStrategy("indistinguishability", shifted=True)
    tau = int(noise.indistinguishability_tau((100,), gamma_ad, base)[0])
    assert tau == 5
    for load in range(0, 200):
        a = noise.adversarial_feedback(np.array([100 - load]), (100,), gamma_ad, base, ctx, 1, 2)
        b = noise.adversarial_feedback(np.array([100 + 2 * tau - load]), (100 + 2 * tau,), gamma_ad,
                                       shifted, ctx, 1, 2)
        assert np.array_equal(a.lack, b.lack), load


def test_shifted_instance_keeps_the_unshifted_tau():
    # floor(0.05·190) = 9 だが floor(0.05·208) = 10
    ctx = rng.RandomnessContext(0)
    gamma_ad = 0.05
    base = AdversaryStrategy("indistinguishability", shifted=False)
    shifted = AdversaryStrategy("indistinguishability", shifted=True)
    assert noise.shifted_demands((190,), gamma_ad) == (208,)
    assert noise.indistinguishability_tau((190,), gamma_ad, base).tolist() == [9]
    assert noise.indistinguishability_tau((208,), gamma_ad, shifted).tolist() == [9]
    for load in range(0, 420):
        a = noise.adversarial_feedback(np.array([190 - load]), (190,), gamma_ad, base, ctx, 1, 2)
        b = noise.adversarial_feedback(np.array([208 - load]), (208,), gamma_ad, shifted, ctx, 1, 2)
        assert np.array_equal(a.lack, b.lack), load


@given(st.integers(1, 5000), st.integers(1, 240))
def test_shifted_tau_matches_base_tau(d, per_mille):
    gamma_ad = per_mille / 1000
    base = AdversaryStrategy("indistinguishability", shifted=False)
    shifted = AdversaryStrategy("indistinguishability", shifted=True)
    (d2,) = noise.shifted_demands((d,), gamma_ad)
    assert noise.indistinguishability_tau((d2,), gamma_ad, shifted).tolist() == \
        noise.indistinguishability_tau((d,), gamma_ad, base).tolist()


def test_tau_never_exceeds_grey_width():
    tau = noise.indistinguishability_tau((7, 33, 100), 0.1, AdversaryStrategy("indistinguishability"))
    assert tau.tolist() == [0, 3, 10]


# ========== ディスパッチとテーブル ==========

def test_feedback_dispatch_exact():
    config = make_config(noise=NoiseSpec(kind="exact"), n=5)
    fb = noise.feedback(config, np.array([-1]), rng.RandomnessContext(0), 1)
    assert fb.shape == (5, 1)
    assert not fb.lack.any()


def test_sigmoid_table():
    rows = noise.sigmoid_table(1.0, (10, 20), 0.1, -3, 3)
    assert len(rows) == 14
    first = rows[0]
    assert first["task"] == 1 and first["deficit"] == -3
    assert first["in_grey_zone"] is False
    assert rows[3]["p_lack"] == 0.5 and rows[3]["in_grey_zone"] is True


# ========== 性質 ==========

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
rates = st.floats(min_value=1e-3, max_value=50.0)


@given(finite, rates)
def test_sigmoid_antisymmetry(x, lam):
    assert noise.sigmoid(x, lam) + noise.sigmoid(-x, lam) == pytest.approx(1.0, abs=1e-12)


@given(finite, finite, rates)
def test_sigmoid_monotone(x, y, lam):
    lo, hi = min(x, y), max(x, y)
    assume(hi - lo > 1e-6)
    assert noise.sigmoid(lo, lam) <= noise.sigmoid(hi, lam)


@given(st.sampled_from(sorted(noise.ADVERSARIES)), st.integers(-200, 200), st.integers(0, 5))
def test_outside_grey_zone_feedback_ignores_strategy(kind, delta, round_index):
    ctx = rng.RandomnessContext(1)
    fb = noise.adversarial_feedback(np.array([delta]), (100,), 0.05, AdversaryStrategy(kind, p=0.5),
                                    ctx, round_index, 6)
    if delta > 5:
        assert fb.lack.all()
    elif delta < -5:
        assert not fb.lack.any()
