"""Pure numpy twin of the compiled RK4 kernel (same stepping rule)."""

import math

import numpy as np


def rk4_integrate(V, y0, times, max_step):
    """Classical RK4 for ``dy/dt = -V y`` sampled at ``times``; steps never exceed ``max_step``."""
    A = -np.ascontiguousarray(V, dtype=np.complex128)
    y = np.array(y0, dtype=np.complex128).ravel()
    times = np.ascontiguousarray(times, dtype=np.float64)
    out = np.empty((times.size, y.size), dtype=np.complex128)
    t = times[0] if times.size else 0.0
    for k, tk in enumerate(times):
        span = tk - t
        if span > 0:
            nsteps = math.ceil(span / max_step)
            h = span / nsteps
            for _ in range(nsteps):
                k1 = A @ y
                k2 = A @ (y + 0.5 * h * k1)
                k3 = A @ (y + 0.5 * h * k2)
                k4 = A @ (y + h * k3)
                y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = tk
        out[k] = y
    return out
