from fractions import Fraction
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

import metrics
from conftest import make_config
from core import InitialAssignmentSpec, NoiseSpec, UndefinedMetricError
from engine import run


# ========== リグレット ==========

def test_instantaneous_regret():
    assert metrics.instantaneous_regret([120, 80], [100, 100]) == 40


def test_decomposition_known_values():
    # c⁺γ = 0.14, c⁻γ = 0.19 → 区間 [81, 114]
    assert metrics.regret_decomposition([120], [100], 0.05) == (6, 14, 0)
    assert metrics.regret_decomposition([70], [100], 0.05) == (0, 19, 11)
    assert metrics.regret_decomposition([100], [100], 0.05) == (0, 0, 0)


def test_decomposition_constants():
    d = metrics.Decomposer([100], 0.05)
    assert d.c_plus == Fraction(14, 5)
    assert d.c_minus == Fraction(19, 5)


def test_decomposition_rejects_non_positive_gamma():
    with pytest.raises(ValueError):
        metrics.regret_decomposition([1], [1], 0)


@given(
    st.lists(st.tuples(st.integers(0, 500), st.integers(1, 300)), min_size=1, max_size=5),
    st.floats(min_value=0.001, max_value=0.2),
)
def test_decomposition_is_exact(pairs, gamma):
    loads = [w for w, _ in pairs]
    demands = [d for _, d in pairs]
    r_plus, r_approx, r_minus = metrics.regret_decomposition(loads, demands, gamma)
    assert r_plus + r_approx + r_minus == metrics.instantaneous_regret(loads, demands)
    assert min(r_plus, r_approx, r_minus) >= 0


def test_regret_series(config):
    trace = run(config)
    series = metrics.regret_series(trace)
    assert series.cumulative[-1] == trace.total_regret
    for r, p, a, m in zip(series.regret, series.r_plus, series.r_approx, series.r_minus):
        assert p + a + m == r


# ========== ポテンシャル ==========

def test_potential_at():
    assert metrics.potential_at([100], [100], 0.05) == (5, 1)
    assert metrics.potential_at([106, 0], [100, 10], 0.05) == (Fraction(21, 2), 1)
    assert metrics.potential_at((0, 200), (100, 100), 0.05) == (105, 1)


def test_potentials_do_not_increase_under_exact_feedback():
    # task 1 は (1+γ)d を大きく超えて離脱だけが起き、離脱したアリが task 2 を埋める
    config = make_config(n=1800, demands=(1000, 1000), noise=NoiseSpec(kind="exact"), gamma=0.05,
                         horizon=100, initial=InitialAssignmentSpec("loads", loads=(1300, 200)))
    series = metrics.potentials(run(config), 0.05, phase_length=2)
    assert len(series.phi) == 50
    assert all(a >= b for a, b in zip(series.phi, series.phi[1:]))
    assert all(a >= b for a, b in zip(series.psi, series.psi[1:]))
    assert series.phi[-1] < series.phi[0]


def test_potentials_at_phase_boundaries():
    trace = run(make_config(horizon=10))
    series = metrics.potentials(trace, 0.05, phase_length=2)
    assert series.rounds == [2, 4, 6, 8, 10]
    assert all(psi in (0, 1) for psi in series.psi)


# ========== closeness ==========

def test_default_burn_in():
    assert metrics.default_burn_in(1024, 2, 0.125) == 12160


def test_closeness():
    trace = SimpleNamespace(regret=np.array([10, 10, 2, 2]))
    assert metrics.closeness(trace, 0.5, [4], burn_in=2) == 1.0
    with pytest.raises(UndefinedMetricError):
        metrics.closeness(trace, 0.5, [4], burn_in=4)
    with pytest.raises(UndefinedMetricError):
        metrics.closeness(trace, 0.0, [4], burn_in=0)


def test_saturation():
    assert metrics.saturation([95, 10], [100, 10], 0.05)
    assert not metrics.saturation([94, 10], [100, 10], 0.05)


def test_exception_bound():
    assert metrics.exception_bound([100, 20], 0.05).tolist() == pytest.approx([28.0, 8.0])


# ========== 振動 ==========

def test_oscillation_report_counts_wide_windows():
    trace = SimpleNamespace(config=make_config(demands=(10,)),
                            deficits=np.array([[5], [-5], [5], [-5], [0], [0]]))
    report = metrics.oscillation_report(trace, window=2, threshold_fractions=0.5)
    task = report.tasks[0]
    assert task.amplitudes.tolist() == [10, 10, 10, 5, 0]
    assert task.flagged == 3
    assert task.flagged_fraction == pytest.approx(0.6)
    assert task.exception_rounds == 0
    assert report.to_dict()["tasks"][0]["max_amplitude"] == 10


def test_oscillation_report_short_trace():
    trace = SimpleNamespace(config=make_config(), deficits=np.array([[1]]))
    assert metrics.oscillation_report(trace, 3, 0.5).tasks[0].windows == 0
    with pytest.raises(ValueError):
        metrics.oscillation_report(trace, 1, 0.5)


def test_exact_trivial_flags_every_window():
    config = make_config(n=2, demands=(1,), noise=NoiseSpec(kind="exact"), algorithm="trivial-sync", horizon=8)
    report = metrics.oscillation_report(run(config), window=2, threshold_fractions=1.0)
    assert report.tasks[0].flagged_fraction == 1.0


# ========== 要約 ==========

def test_summarize(config):
    trace = run(config)
    summary = metrics.summarize(trace, gamma_star=0.05, burn_in=10)
    assert summary["total_regret"] == trace.total_regret
    assert summary["r_plus"] + summary["r_approx"] + summary["r_minus"] == pytest.approx(trace.total_regret)
    assert summary["closeness"] == pytest.approx(trace.regret[10:].mean() / (0.05 * 25))
    assert summary["psi_final"] in (0, 1)


def test_summarize_without_critical_value():
    trace = run(make_config(noise=NoiseSpec(kind="exact"), horizon=6))
    summary = metrics.summarize(trace, gamma_star=None)
    assert summary["closeness"] is None
    assert summary["burn_in"] is None
