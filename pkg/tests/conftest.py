import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] AC{number:>2}  {title}" + (f"  ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_matrix(rng, n=2):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_hermitian(rng, n=2):
    A = random_matrix(rng, n)
    return 0.5 * (A + A.conj().T)


def random_density(rng, n=2, pure=False):
    if pure:
        psi = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    A = random_matrix(rng, n)
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng):
    from spinreact import PureSpinState

    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    return PureSpinState(psi[0], psi[1])


def log_uniform(rng, lo, hi, size=None):
    return 10 ** rng.uniform(np.log10(lo), np.log10(hi), size=size)


def mp_expm_apply(M, p0, times, dps=40):
    """``expm(-M t) @ p0`` in extended precision; reference for stiff 2 x 2 blocks."""
    import mpmath

    with mpmath.workdps(dps):
        A = -mpmath.matrix(np.asarray(M, dtype=complex).tolist())
        v = mpmath.matrix(np.asarray(p0, dtype=complex).tolist())
        out = []
        for t in times:
            w = mpmath.expm(A * t) * v
            out.append([complex(w[i]) for i in range(w.rows)])
    return np.array(out)
