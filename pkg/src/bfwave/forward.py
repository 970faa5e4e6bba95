"""Measurement synthesis: boundary trace of the forced wave equation.

The plant is u_tt = u_xx + q(x) cos(omega t) from rest with homogeneous
Dirichlet walls; the measurement is the Neumann trace u_x(t, 0) sampled at
every time node. Noise is additive white Gaussian, calibrated against the
RMS of the clean signal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid1D
from .leapfrog import _leap, init_leapfrog

__all__ = [
    "MeasurementRecord",
    "simulate_forward",
    "add_noise",
    "write_measurement_csv",
    "read_measurement_csv",
]


@dataclass(frozen=True)
class MeasurementRecord:
    """A sampled output series with its provenance.

    y has n_steps_per_pass + 1 entries at t_n = n*dt. provenance is
    "clean" or "noisy"; noise_seed is None for clean records.
    """

    y: np.ndarray
    dt: float
    T: float
    omega: float | None = None
    noise_level: float = 0.0
    noise_seed: int | None = None
    provenance: str = "clean"

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.y)) * self.dt


def simulate_forward(q: np.ndarray, omega: float, grid: Grid1D) -> MeasurementRecord:
    """Leapfrog run of the forced plant from rest, recording the left trace."""
    q = np.asarray(q, dtype=float)
    if q.shape != (grid.nx + 1,):
        raise ValueError(f"q has shape {q.shape}, expected ({grid.nx + 1},)")
    if q[0] != 0.0 or q[-1] != 0.0:
        raise ValueError("source must vanish at both endpoints")
    n, dt = grid.n_steps_per_pass, grid.dt
    c2 = grid.cfl * grid.cfl
    inv2dx = 1.0 / (2.0 * grid.dx)
    dt2q = dt * dt * q
    state = init_leapfrog(np.zeros(grid.nx + 1), None, q.copy(), grid, "forward")
    u_prev, u_curr = state.u_prev, state.u_curr
    y = np.empty(n + 1)
    y[0] = 0.0
    for k in range(n):
        un = _leap(u_prev, u_curr, c2)
        un[1:-1] += dt2q[1:-1] * np.cos(omega * k * dt)
        un[0] = 0.0
        un[-1] = 0.0
        u_prev, u_curr = u_curr, un
        y[k + 1] = (-3.0 * u_curr[0] + 4.0 * u_curr[1] - u_curr[2]) * inv2dx
    return MeasurementRecord(y=y, dt=dt, T=grid.T, omega=omega)


def rms(y: np.ndarray, dt: float, T: float) -> float:
    """(integral of y^2 / T)^(1/2) with trapezoid quadrature."""
    s = np.sum(y * y) - 0.5 * (y[0] * y[0] + y[-1] * y[-1])
    return float(np.sqrt(dt * s / T))


def add_noise(record: MeasurementRecord, level: float, seed: int) -> MeasurementRecord:
    """Additive white Gaussian noise with sigma = level * RMS(clean signal)."""
    if level < 0.0:
        raise ValueError(f"noise level must be >= 0, got {level}")
    if level == 0.0:
        return replace(record, noise_level=0.0, noise_seed=seed, provenance=record.provenance)
    sigma = level * rms(record.y, record.dt, record.T)
    rng = np.random.default_rng(seed)
    y_noisy = record.y + sigma * rng.standard_normal(record.y.shape)
    return replace(record, y=y_noisy, noise_level=level, noise_seed=seed, provenance="noisy")


def write_measurement_csv(record: MeasurementRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "y"])
        for n, v in enumerate(record.y):
            w.writerow([format(n * record.dt, ".17g"), format(v, ".17g")])


def read_measurement_csv(path, omega: float | None = None) -> MeasurementRecord:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header[:2] != ["t", "y"]:
            raise ValueError(f"unexpected measurement header {header!r}")
        rows = [(float(a), float(b)) for a, b in r]
    if len(rows) < 2:
        raise ValueError("measurement needs at least two samples")
    t = np.array([a for a, _ in rows])
    y = np.array([b for _, b in rows])
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=0, atol=1e-12 + 1e-9 * dt):
        raise ValueError("measurement sampling is not uniform")
    return MeasurementRecord(y=y, dt=float(dt), T=float(t[-1]), omega=omega)
