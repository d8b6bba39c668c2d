"""Effective single-site operators extracted from multi-site kinetics.

Two independent routes give the effective decay rate of each traced
Liouville element: the slowest eigenvalue of that element's block of the
kinetic operator, and a log-linear fit to the propagated trajectory after
the fast transient.  The ratio of the coherence rate to the population rate
(the dephasing ratio) separates Haberkorn-like behaviour (1/2) from
measurement-like behaviour (1).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .dynamics import initial_vector, propagate
from .liouville import ELEMENTS, PureSpinState, multi_site_vector, site_blocks, trace_out_sites
from .operators import haberkorn_superop
from .schemes import block_decompose, build_common_intermediate, build_three_site, build_two_site

CASES = ("a", "b", "c", "d", "e")
CLASSES = ("haberkorn-like", "measurement-like", "intermediate", "non-spin-selective")

# transient exclusion and window length, in units of the fast / slow time constants
TRANSIENT_WIDTHS = 20.0
WINDOW_WIDTHS = 3.0
FIT_POINTS = 41


def fit_decay_rate(times: ArrayLike, values: ArrayLike, window: tuple[float, float] | None = None,
                   transient: float = 0.0) -> tuple[float, float]:
    """Least-squares slope of ``-log|value|`` against time.

    Only samples with ``t >= times[0] + transient`` and inside ``window``
    are used.  Returns ``(rate, rms_residual)`` of the log fit.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values)
    mask = t >= t[0] + transient
    if window is not None:
        mask &= (t >= window[0]) & (t <= window[1])
    t, y = t[mask], y[mask]
    if t.size < 2:
        raise ValueError("fewer than two samples inside the fit window")
    if np.iscomplexobj(y):
        mag = np.abs(y)
    else:
        if np.any(y <= 0):
            raise ValueError("non-positive samples; rate fits need H = 0 (no oscillation)")
        mag = y
    if np.any(mag <= 0) or not np.all(np.isfinite(mag)):
        raise ValueError("samples must be finite and non-zero")
    logs = np.log(mag)
    slope, intercept = np.polyfit(t, logs, 1)
    resid = logs - (slope * t + intercept)
    return float(-slope) + 0.0, float(np.sqrt(np.mean(resid**2)))


def _default_state(n_sites: int) -> np.ndarray:
    return multi_site_vector(PureSpinState.superposition().density(), [1.0] + [0.0] * (n_sites - 1))


def _element_value(vec: np.ndarray, element: str) -> complex:
    i, j = "ST".index(element[0]), "ST".index(element[1])
    return trace_out_sites(site_blocks(vec))[i, j]


def block_eigenrates(op: ArrayLike) -> dict[str, np.ndarray]:
    """Sorted real parts of each element block's eigenvalues."""
    return {b.element: np.sort(np.linalg.eigvals(b.matrix).real) for b in block_decompose(op)}


def fit_window(eigenrates: np.ndarray) -> tuple[float, float]:
    """Fit window that skips the fast transient and spans a few slow time constants."""
    slow = eigenrates[0]
    fast = eigenrates[1] if eigenrates.size > 1 else None
    start = TRANSIENT_WIDTHS / fast if fast is not None and fast > 0 else 0.0
    if slow > 1e-12 * max(abs(fast or 0.0), 1.0):
        span = WINDOW_WIDTHS / slow
    elif fast is not None and fast > 0:
        span = WINDOW_WIDTHS / fast
    else:
        span = 1.0
    return start, start + span


@dataclass
class EffectiveOperatorReport:
    """Effective per-element decay rates of a (traced) kinetic operator."""

    fitted_rates: dict[str, float]
    eigen_rates: dict[str, float]
    residuals: dict[str, float]
    dephasing_ratio: float
    classification: str

    def effective_superop(self) -> np.ndarray:
        """Diagonal 4 x 4 operator built from the fitted rates."""
        return np.diag([self.fitted_rates[e] for e in ELEMENTS])


def element_rates(op: ArrayLike, rho0: ArrayLike | None = None, n_points: int = FIT_POINTS):
    """Fitted and eigenvalue rates for every element with non-zero initial value.

    ``op`` must be a kinetic operator (no Hamiltonian).  A 2 x 2 ``rho0``
    starts in conformation 1.  Returns three dicts ``(fitted, eigen,
    residual)``; elements that start at zero are ``nan``.
    """
    op = np.asarray(op)
    n_sites = op.shape[0] // 4
    if rho0 is None:
        v0 = _default_state(n_sites)
    elif np.ndim(rho0) == 2:
        v0 = multi_site_vector(rho0, [1.0] + [0.0] * (n_sites - 1))
    else:
        v0 = initial_vector(rho0, n_sites)
    eig = block_eigenrates(op)
    fitted, eigen, resid = {}, {}, {}
    for e in ELEMENTS:
        if abs(_element_value(v0, e)) == 0.0:
            fitted[e] = eigen[e] = resid[e] = float("nan")
            continue
        eigen[e] = float(eig[e][0])
        lo, hi = fit_window(eig[e])
        times = np.linspace(lo, hi, n_points)
        traj = propagate(op, v0, times)
        fitted[e], resid[e] = fit_decay_rate(times, traj.element(e))
    return fitted, eigen, resid


def _ratio(rates: dict[str, float]) -> float:
    pop = np.nansum([rates["SS"], rates["TT"]])
    coh = rates["ST"]
    if not pop > 1e-12 * max(abs(coh), 1.0):
        raise ValueError("population rates vanish; dephasing ratio undefined")
    return float(coh / pop)


def classify(rates: dict[str, float], tol: float = 0.05) -> tuple[float, str]:
    """Dephasing ratio ``rate_ST / (rate_SS + rate_TT)`` and the operator class it implies."""
    ratio = _ratio(rates)
    vals = np.array([rates[e] for e in ELEMENTS if np.isfinite(rates[e])])
    if vals.size == 4 and np.ptp(vals) <= tol * np.max(vals):
        return ratio, "non-spin-selective"
    if abs(ratio - 0.5) <= tol:
        return ratio, "haberkorn-like"
    if abs(ratio - 1.0) <= tol:
        return ratio, "measurement-like"
    return ratio, "intermediate"


def effective_operator(op: ArrayLike, rho0: ArrayLike | None = None, tol: float = 0.05) -> EffectiveOperatorReport:
    fitted, eigen, resid = element_rates(op, rho0)
    ratio, label = classify(fitted, tol)
    return EffectiveOperatorReport(fitted, eigen, resid, ratio, label)


def dephasing_ratio(op: ArrayLike, rho0: ArrayLike | None = None, method: str = "fit") -> float:
    """Coherence decay rate divided by population decay rate.

    ``method="fit"`` fits propagated trajectories; ``method="eigen"`` uses
    the slowest block eigenvalues.  For singlet-only channels this is
    ``rate(|rho_ST|) / rate(rho_SS)``.
    """
    fitted, eigen, _ = element_rates(op, rho0)
    if method == "fit":
        return _ratio(fitted)
    if method == "eigen":
        return _ratio(eigen)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class LimitCaseResult:
    case: str
    description: str
    predicted: float
    fitted: float
    rel_err: float
    passed: bool
    details: dict = field(default_factory=dict)

    def csv_line(self) -> str:
        return f"{self.case},{self.predicted:.17g},{self.fitted:.17g},{self.rel_err:.17g},{str(self.passed).lower()}"


def canonical_parameters(case: str, factor: float = 100.0) -> dict[str, float]:
    """Rate constants for each limiting case, with ``>>`` meaning a factor ``factor``."""
    f = float(factor)
    if case == "a":
        return dict(kS1=1.0, kS2=1.0, k12=5.0, k21=7.0)
    if case == "b":
        return dict(kS1=0.0, kS2=f * f, k12=1.0, k21=f)
    if case == "c":
        return dict(kS1=0.0, kS2=1.0, k12=f, k21=f * f)
    if case == "d":
        return dict(k12=1.0, k21=f, kS2=f * f, kT2=f * f)
    if case == "e":
        return dict(k12=1.0, k21=f, k13=2.0, k31=f, kS2=f * f, kT3=f * f)
    raise ValueError(f"unknown limit case {case!r}; choose from {CASES}")


def canonical_operator(case: str, factor: float = 100.0) -> np.ndarray:
    p = canonical_parameters(case, factor)
    if case in "abc":
        return build_two_site(p["kS1"], p["kS2"], p["k12"], p["k21"])
    if case == "d":
        return build_common_intermediate(p["k12"], p["k21"], p["kS2"], p["kT2"])
    return build_three_site(p["k12"], p["k21"], p["k13"], p["k31"], p["kS2"], p["kT3"])


def _rel(fitted, predicted):
    return abs(fitted - predicted) / abs(predicted)


def _case_a(factor, tol):
    p = canonical_parameters("a", factor)
    K2 = canonical_operator("a", factor)
    times = np.linspace(0.0, 10.0 / p["kS1"], 101)
    two = propagate(K2, _default_state(2), times)
    one = propagate(haberkorn_superop(p["kS1"]), PureSpinState.superposition().density(), times)
    deviation = float(np.max(np.abs(two.states - one.states)))
    fitted, eigen, _ = element_rates(K2)
    rel = _rel(fitted["SS"], p["kS1"])
    return LimitCaseResult(
        "a", "kS1 = kS2: traced two-site evolution equals single-site Haberkorn",
        p["kS1"], fitted["SS"], max(rel, deviation), deviation <= 1e-10 and rel <= tol,
        {"max_deviation": deviation, "fitted": fitted, "eigen": eigen, "params": p},
    )


def _rate_case(case, description, predicted: dict[str, float], ratio_pred: float, factor, tol):
    K = canonical_operator(case, factor)
    fitted, eigen, resid = element_rates(K)
    errs = {e: _rel(fitted[e], v) for e, v in predicted.items()}
    eig_errs = {e: _rel(eigen[e], v) for e, v in predicted.items()}
    ratio, label = classify(fitted, tol)
    ratio_err = abs(ratio - ratio_pred) / ratio_pred
    worst = max(max(errs.values()), ratio_err)
    passed = worst <= tol and max(eig_errs.values()) <= tol
    return LimitCaseResult(
        case, description, predicted["SS"], fitted["SS"], worst, passed,
        {"fitted": fitted, "eigen": eigen, "residuals": resid, "predicted": predicted,
         "dephasing_ratio": ratio, "classification": label, "params": canonical_parameters(case, factor)},
    )


def verify_limit(case: str, factor: float = 100.0, tol: float = 0.05) -> LimitCaseResult:
    """Run one canonical limiting-case check; failures are reported, not raised."""
    p = canonical_parameters(case, factor)
    if case == "a":
        return _case_a(factor, tol)
    if case == "b":
        k = p["k12"]
        return _rate_case("b", "kS2 >> k21 >> k12, kS1 = 0: measurement operator with k_S = k12",
                          {"SS": k, "ST": k, "TS": k}, 1.0, factor, tol)
    if case == "c":
        k = p["kS2"] * p["k12"] / p["k21"]
        return _rate_case("c", "k21 >> k12 >> kS2, kS1 = 0: Haberkorn operator with k_S = kS2 k12 / k21",
                          {"SS": k, "ST": k / 2, "TS": k / 2}, 0.5, factor, tol)
    if case == "d":
        k = p["k12"]
        return _rate_case("d", "common intermediate, kS2 = kT2 >> k21 >> k12: single exponential at k12",
                          {e: k for e in ELEMENTS}, 0.5, factor, tol)
    kS, kT = p["k12"], p["k13"]
    return _rate_case("e", "three-site separate intermediates: measurement operator with k_S = k12, k_T = k13",
                      {"SS": kS, "ST": kS + kT, "TS": kS + kT, "TT": kT}, 1.0, factor, tol)


def verify_limits(factor: float = 100.0, tol: float = 0.05, cases: Iterable[str] = CASES) -> list[LimitCaseResult]:
    return [verify_limit(c, factor, tol) for c in cases]


@dataclass(frozen=True)
class ScanPoint:
    ratio: float
    dephasing_ratio: float


def _scan_point(args) -> ScanPoint:
    r, k12, k21, method = args
    K = build_two_site(0.0, r * k21, k12, k21)
    return ScanPoint(float(r), dephasing_ratio(K, method=method))


def crossover_scan(ratios: Sequence[float], k12: float = 1.0, k21: float = 100.0, method: str = "fit",
                   workers: int = 1) -> list[ScanPoint]:
    """Dephasing ratio of the singlet-only two-site scheme as ``kS2 / k21`` varies.

    ``kS1`` is zero; ``workers > 1`` evaluates points in a process pool with
    results identical to the sequential run.
    """
    ratios = [float(r) for r in ratios]
    if not ratios:
        raise ValueError("empty ratio grid")
    if any(not np.isfinite(r) or r <= 0 for r in ratios):
        raise ValueError("ratio grid values must be positive")
    if k12 <= 0 or k21 <= 0:
        raise ValueError("k12 and k21 must be positive")
    jobs = [(r, k12, k21, method) for r in ratios]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_point, jobs))
    return [_scan_point(j) for j in jobs]
