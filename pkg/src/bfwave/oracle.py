"""Closed-form sine-series solutions used as an independent reference.

Everything here is derived analytically (Duhamel formulas plus quadrature);
no finite-difference machinery is involved, so these routines can vouch for
the solver rather than echo it.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_simpson

from .grid import Grid1D
from .observer import OscillatorState

__all__ = [
    "ResonanceError",
    "sine_coefficients",
    "synthesize_modes",
    "free_modal_solution",
    "forced_modal_solution",
    "neumann_trace_series",
    "oracle_measurement",
    "oscillator_closed_form",
    "poly_paper_coefficients",
]

RESONANCE_TOL = 1e-8


class ResonanceError(ValueError):
    """Forcing frequency collides with a natural frequency k*pi."""


def _mode_freqs(n_modes: int) -> np.ndarray:
    return np.pi * np.arange(1, n_modes + 1)


def _check_resonance(omega: float, n_modes: int) -> None:
    k = _mode_freqs(n_modes)
    bad = np.abs(np.abs(omega) - k) < RESONANCE_TOL
    if np.any(bad):
        idx = int(np.argmax(bad)) + 1
        raise ResonanceError(f"omega={omega} is within {RESONANCE_TOL} of mode {idx} frequency {idx}*pi")


def sine_coefficients(f: np.ndarray, grid: Grid1D, n_modes: int) -> np.ndarray:
    """Trapezoid projection q_k = 2 * integral of f(x) sin(k pi x)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.nx + 1,):
        raise ValueError("field/grid mismatch")
    scale = 1.0 + float(np.max(np.abs(f)))
    if abs(f[0]) > 1e-9 * scale or abs(f[-1]) > 1e-9 * scale:
        raise ValueError("sine projection expects zero endpoint values")
    if n_modes < 1 or n_modes > grid.nx:
        raise ValueError(f"n_modes must lie in [1, nx]={[1, grid.nx]}, got {n_modes}")
    x = grid.nodes
    k = np.arange(1, n_modes + 1)
    # endpoints contribute nothing (f = 0 there), so plain sums are trapezoid sums
    return 2.0 * grid.dx * (np.sin(np.outer(k, np.pi * x)) @ f)


def synthesize_modes(coeffs: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Nodal samples of sum_k coeffs[k-1] sin(k pi x), endpoints exactly zero."""
    coeffs = np.asarray(coeffs, dtype=float)
    x = grid.nodes
    k = np.arange(1, len(coeffs) + 1)
    f = coeffs @ np.sin(np.outer(k, np.pi * x))
    f[0] = 0.0
    f[-1] = 0.0
    return f


def free_modal_solution(coeffs: np.ndarray, t: float) -> np.ndarray:
    """Coefficients at time t of the free wave started at (sum q_k sin, 0)."""
    coeffs = np.asarray(coeffs, dtype=float)
    return coeffs * np.cos(_mode_freqs(len(coeffs)) * t)


def forced_modal_solution(coeffs: np.ndarray, omega: float, t: float):
    """Mode amplitudes and their velocities for forcing q(x) cos(omega t), zero data.

    a_k(t) = q_k (cos(omega t) - cos(k pi t)) / ((k pi)^2 - omega^2)
    """
    coeffs = np.asarray(coeffs, dtype=float)
    _check_resonance(omega, len(coeffs))
    wk = _mode_freqs(len(coeffs))
    denom = wk * wk - omega * omega
    pos = coeffs * (np.cos(omega * t) - np.cos(wk * t)) / denom
    vel = coeffs * (-omega * np.sin(omega * t) + wk * np.sin(wk * t)) / denom
    return pos, vel


def neumann_trace_series(coeffs: np.ndarray) -> float:
    """x-derivative at x = 0 of a sine series: sum_k a_k * k * pi."""
    coeffs = np.asarray(coeffs, dtype=float)
    return float(np.sum(coeffs * _mode_freqs(len(coeffs))))


def oracle_measurement(coeffs: np.ndarray, omega: float, times: np.ndarray) -> np.ndarray:
    """Analytic output y(t) = sum_k q_k k pi (cos(omega t) - cos(k pi t)) / ((k pi)^2 - omega^2)."""
    coeffs = np.asarray(coeffs, dtype=float)
    _check_resonance(omega, len(coeffs))
    times = np.asarray(times, dtype=float)
    wk = _mode_freqs(len(coeffs))
    amp = coeffs * wk / (wk * wk - omega * omega)
    return (np.cos(np.outer(times, [omega])) - np.cos(np.outer(times, wk))) @ amp


def poly_paper_coefficients(n_modes: int) -> np.ndarray:
    """Sine coefficients of x - x^2: 8/(k pi)^3 for odd k, 0 for even k."""
    k = np.arange(1, n_modes + 1)
    c = 8.0 / (k * np.pi) ** 3
    c[k % 2 == 0] = 0.0
    return c


def _rotation(omega: float, t):
    """exp(t*A) for A = [[0, 1], [-omega^2, 0]], vectorized over t."""
    t = np.asarray(t, dtype=float)
    if omega == 0.0:
        one = np.ones_like(t)
        return one, t, np.zeros_like(t), one  # entries r11, r12, r21, r22
    c = np.cos(omega * t)
    s = np.sin(omega * t)
    return c, s / omega, -omega * s, c


def oscillator_closed_form(
    omega: float,
    forcing: np.ndarray,
    dt: float,
    z0: OscillatorState,
    t: float,
) -> OscillatorState:
    """Variation-of-constants solution of the driven oscillator.

    z12(t) = R(t) z12(0) + integral_0^t R(t-s) (0, g(s)) ds, with R the
    rotation-type propagator for frequency omega; the convolution and the
    z3 = integral of z1 channel are evaluated by cumulative Simpson over
    the forcing samples (spacing dt). t must be a sample time.
    """
    g = np.asarray(forcing, dtype=float)
    m = int(round(t / dt))
    if not np.isclose(m * dt, t, rtol=0, atol=1e-12 + 1e-9 * dt) or m >= len(g):
        raise ValueError("t must be a forcing sample time within range")
    s = np.arange(m + 1) * dt
    # R(t - s)(0, g) = (r12(t-s) g, r22(t-s) g); factoring R(t)R(-s) keeps prefix sums
    _, r12m, _, r22m = _rotation(omega, -s)
    h1 = r12m * g[: m + 1]
    h2 = r22m * g[: m + 1]
    if m == 0:
        j1 = np.zeros(1)
        j2 = np.zeros(1)
    else:
        j1 = cumulative_simpson(h1, dx=dt, initial=0.0)
        j2 = cumulative_simpson(h2, dx=dt, initial=0.0)
    c11s, c12s, c21s, c22s = _rotation(omega, s)
    z1_path = c11s * (z0.z1 + j1) + c12s * (z0.z2 + j2)
    z2_path = c21s * (z0.z1 + j1) + c22s * (z0.z2 + j2)
    z3 = z0.z3 if m == 0 else z0.z3 + float(cumulative_simpson(z1_path, dx=dt, initial=0.0)[-1])
    return OscillatorState(z1=float(z1_path[-1]), z2=float(z2_path[-1]), z3=z3)
