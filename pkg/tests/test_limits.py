import numpy as np
import pytest

from spinreact.dynamics import propagate
from spinreact.limits import (
    CASES,
    CLASSES,
    canonical_operator,
    classify,
    crossover_scan,
    dephasing_ratio,
    effective_operator,
    element_rates,
    fit_decay_rate,
    fit_window,
    verify_limit,
    verify_limits,
)
from spinreact.liouville import PureSpinState, multi_site_vector
from spinreact.operators import haberkorn_superop, measurement_superop
from spinreact.schemes import build_two_site

from .conftest import log_uniform, random_pure_state

PLUS = PureSpinState.superposition()


def test_fit_pure_exponential():
    t = np.linspace(0, 2, 21)
    rate, resid = fit_decay_rate(t, np.exp(-3 * t))
    assert rate == pytest.approx(3.0, abs=1e-12)
    assert resid < 1e-12


def test_fit_ignores_fast_transient():
    t = np.linspace(0, 3, 301)
    y = 2 * np.exp(-t) + 1e-6 * np.exp(-100 * t)
    rate, _ = fit_decay_rate(t, y, window=(0.5, 3.0))
    assert rate == pytest.approx(1.0, abs=1e-3)
    rate, _ = fit_decay_rate(t, y, transient=0.5)
    assert rate == pytest.approx(1.0, abs=1e-3)


def test_fit_constant_and_complex():
    t = np.linspace(0, 1, 5)
    assert fit_decay_rate(t, np.full(5, 0.7))[0] == pytest.approx(0.0, abs=1e-12)
    rate, _ = fit_decay_rate(t, 0.5j * np.exp(-2 * t))
    assert rate == pytest.approx(2.0)


def test_fit_rejects_bad_samples():
    t = np.linspace(0, 1, 5)
    with pytest.raises(ValueError, match="H = 0"):
        fit_decay_rate(t, np.cos(4 * t))
    with pytest.raises(ValueError):
        fit_decay_rate(t, np.exp(-t), window=(2, 3))
    with pytest.raises(ValueError):
        fit_decay_rate(t, np.zeros(5, dtype=complex))


def test_fit_window_spans_slow_time_constants():
    lo, hi = fit_window(np.array([0.5, 200.0]))
    assert lo == pytest.approx(0.1)
    assert hi - lo == pytest.approx(6.0)
    assert fit_window(np.array([0.0, 0.0])) == (0.0, 1.0)


@pytest.mark.parametrize("kS", [0.1, 1.0, 40.0])
def test_single_site_dephasing_ratios(kS):
    for method in ("fit", "eigen"):
        assert dephasing_ratio(haberkorn_superop(kS), method=method) == pytest.approx(0.5, abs=1e-10)
        assert dephasing_ratio(measurement_superop(kS), method=method) == pytest.approx(1.0, abs=1e-10)


def test_dephasing_ratio_bad_method():
    with pytest.raises(ValueError):
        dephasing_ratio(haberkorn_superop(1.0), method="guess")


def test_dephasing_ratio_requires_population_decay():
    with pytest.raises(ValueError, match="undefined"):
        dephasing_ratio(np.zeros((4, 4)))


def test_measurement_regime_two_site_ratio():
    K = build_two_site(0.0, 1e4, 1.0, 100.0)
    assert dephasing_ratio(K) == pytest.approx(1.0, abs=0.03)


def test_element_rates_skip_absent_elements():
    fitted, eigen, resid = element_rates(haberkorn_superop(1.0, 2.0), np.diag([1.0, 0.0]))
    assert fitted["SS"] == pytest.approx(1.0)
    for e in ("ST", "TS", "TT"):
        assert np.isnan(fitted[e]) and np.isnan(eigen[e]) and np.isnan(resid[e])


def test_fit_and_eigen_routes_agree_single_site(rng):
    for _ in range(5):
        kS, kT = log_uniform(rng, 1e-2, 1e2, size=2)
        fitted, eigen, _ = element_rates(haberkorn_superop(kS, kT))
        for e in fitted:
            assert fitted[e] == pytest.approx(eigen[e], rel=1e-10)


def test_equal_site_rates_reduce_to_single_site(rng):
    for _ in range(20):
        kS = log_uniform(rng, 1e-2, 1e2)
        k12, k21 = log_uniform(rng, 1e-2, 1e4, size=2)
        K = build_two_site(kS, kS, k12, k21)
        rho = random_pure_state(rng).density()
        times = np.linspace(0, 10 / kS, 21)
        dist = rng.dirichlet([1, 1])
        two = propagate(K, multi_site_vector(rho, dist), times).states
        one = propagate(haberkorn_superop(kS), rho, times).states
        assert np.max(np.abs(two - one)) < 1e-10


def test_classify_labels():
    assert classify({"SS": 1, "ST": 0.5, "TS": 0.5, "TT": 0})[1] == "haberkorn-like"
    assert classify({"SS": 1, "ST": 1, "TS": 1, "TT": 0})[1] == "measurement-like"
    assert classify({"SS": 1, "ST": 0.75, "TS": 0.75, "TT": 0})[1] == "intermediate"
    assert classify({"SS": 2, "ST": 2, "TS": 2, "TT": 2})[1] == "non-spin-selective"
    ratio, label = classify({"SS": 1, "ST": 2, "TS": 2, "TT": 1})
    assert ratio == 1.0 and label == "measurement-like"
    assert set(CLASSES) >= {"haberkorn-like", "measurement-like", "intermediate", "non-spin-selective"}


def test_effective_operator_report():
    rep = effective_operator(measurement_superop(1.0, 2.0))
    assert rep.classification == "measurement-like"
    assert np.allclose(rep.effective_superop(), np.diag([1.0, 3.0, 3.0, 2.0]), rtol=1e-10)
    rep = effective_operator(canonical_operator("c"))
    assert rep.classification == "haberkorn-like"


@pytest.mark.parametrize("case", CASES)
def test_canonical_cases_pass(case):
    r = verify_limit(case)
    assert r.passed, (case, r.rel_err, r.details.get("fitted"))
    assert np.isfinite(r.fitted)


def test_case_labels_and_ratios():
    by_case = {r.case: r for r in verify_limits()}
    assert by_case["b"].details["classification"] == "measurement-like"
    assert by_case["c"].details["classification"] == "haberkorn-like"
    assert by_case["d"].details["classification"] == "non-spin-selective"
    assert by_case["e"].details["classification"] == "measurement-like"
    assert by_case["a"].details["max_deviation"] < 1e-12


def test_small_separation_fails_gracefully():
    results = verify_limits(factor=3.0)
    assert [r.case for r in results] == list(CASES)
    assert results[0].passed
    assert not all(r.passed for r in results[1:])
    for r in results:
        line = r.csv_line().split(",")
        assert len(line) == 5 and line[-1] in ("true", "false")
        assert np.isfinite(float(line[3]))


def test_unknown_case():
    with pytest.raises(ValueError, match="unknown"):
        verify_limit("z")


def test_crossover_endpoints_and_monotone():
    pts = crossover_scan(np.geomspace(1e-3, 1e3, 9))
    ratios = [p.dephasing_ratio for p in pts]
    assert ratios[0] == pytest.approx(0.5, abs=0.05)
    assert ratios[-1] == pytest.approx(1.0, abs=0.05)
    assert all(0.5 < r < 1.0 for r in ratios[1:-1])
    assert np.all(np.diff(ratios) > 0)


def test_crossover_parallel_identical():
    grid = [1e-2, 1.0, 1e2]
    assert crossover_scan(grid, workers=2) == crossover_scan(grid)


def test_crossover_grid_validation():
    with pytest.raises(ValueError, match="empty"):
        crossover_scan([])
    with pytest.raises(ValueError):
        crossover_scan([1.0, -2.0])
    with pytest.raises(ValueError):
        crossover_scan([1.0], k21=0.0)
