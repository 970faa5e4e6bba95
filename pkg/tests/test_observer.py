import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfwave.forward import MeasurementRecord, simulate_forward
from bfwave.grid import Gains, build_grid
from bfwave.leapfrog import init_leapfrog
from bfwave.observer import (
    ExtendedMeasurement,
    ObserverState,
    OscillatorState,
    extended_output,
    extract_estimate,
    initial_observer_state,
    injection_value,
    observer_half_pass,
    oscillator_step,
    run_back_and_forth,
    run_plant_cycle,
    simulate_cascade,
)
from bfwave.oracle import oscillator_closed_form


@pytest.fixture(scope="module")
def grid():
    return build_grid(20, 0.05, 3.0)


def poly_source(g):
    x = g.nodes
    q = x - x * x
    q[0] = q[-1] = 0.0
    return q


def zero_measurement(g):
    return MeasurementRecord(y=np.zeros(g.n_steps_per_pass + 1), dt=g.dt, T=g.T)


class TestOscillatorStep:
    def test_exact_rotation_quarter_turn(self):
        # homogeneous plant dynamics are propagated exactly, z3 included
        z = oscillator_step(
            OscillatorState(1.0, 0.0, 0.0), 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, np.pi / 2.0, "plant"
        )
        assert z.z1 == pytest.approx(0.0, abs=1e-15)
        assert z.z2 == pytest.approx(-1.0, rel=1e-14)
        assert z.z3 == pytest.approx(1.0, rel=1e-14)

    def test_zero_stays_zero(self):
        z = oscillator_step(OscillatorState(0, 0, 0), 0.0, 0.0, 0.0, 0.0, 1.7, 0.4, 0.01)
        assert z == OscillatorState(0.0, 0.0, 0.0)

    def test_constant_trace_closed_form(self):
        # z1(t) = 1 - cos t for plant, omega = 1, unit trace forcing
        dt = 5e-4
        z = OscillatorState(0.0, 0.0, 0.0)
        for _ in range(2000):
            z = oscillator_step(z, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, dt, "plant")
        assert z.z1 == pytest.approx(1.0 - np.cos(1.0), abs=1e-6)

    def test_matches_quadrature_oracle(self):
        # independent cross-check on a slowly varying forcing
        dt = 1e-3
        n = 1500
        s = np.arange(n + 1) * dt
        g = np.sin(1.3 * s)
        z = OscillatorState(0.2, -0.1, 0.05)
        zs = z
        for k in range(n):
            zs = oscillator_step(zs, g[k], g[k + 1], 0.0, 0.0, 2.0, 0.0, dt, "plant")
        zo = oscillator_closed_form(2.0, g, dt, z, n * dt)
        assert zs.z1 == pytest.approx(zo.z1, abs=1e-6)
        assert zs.z2 == pytest.approx(zo.z2, abs=1e-6)
        assert zs.z3 == pytest.approx(zo.z3, abs=1e-6)

    @given(
        z1=st.floats(-2, 2),
        z2=st.floats(-2, 2),
        z3=st.floats(-2, 2),
        omega=st.floats(0.3, 3.0),
    )
    @settings(max_examples=30)
    def test_backward_inverts_forward(self, z1, z2, z3, omega):
        # the (z1, z2) rotation inverts; z3 keeps integrating either way
        z = OscillatorState(z1, z2, z3)
        fwd = oscillator_step(z, 0.0, 0.0, 0.0, 0.0, omega, 0.0, 0.05, "plant", "forward")
        back = oscillator_step(fwd, 0.0, 0.0, 0.0, 0.0, omega, 0.0, 0.05, "plant", "backward")
        assert back.z1 == pytest.approx(z.z1, abs=1e-12)
        assert back.z2 == pytest.approx(z.z2, abs=1e-12)

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError):
            oscillator_step(OscillatorState(0, 0, 0), 0, 0, 0, 0, 1.0, 0.5, 0.1, "wrong")


class TestSimulateCascade:
    def test_zero_source(self, grid):
        out = simulate_cascade(np.zeros(21), 1.0, grid)
        assert not out.Y.any()

    def test_static_mode_output(self, grid):
        q = np.sin(np.pi * grid.nodes)
        q[0] = q[-1] = 0.0
        out = simulate_cascade(q, 0.0, grid)
        t = grid.times
        exact = (1.0 - np.cos(np.pi * t)) / np.pi
        assert np.max(np.abs(out.Y - exact)) <= 1e-2

    def test_output_equivalence(self, grid):
        # the cascade output and the direct measurement agree
        q = np.sin(np.pi * grid.nodes)
        q[0] = q[-1] = 0.0
        y = simulate_forward(q, 0.0, grid).y
        out = simulate_cascade(q, 0.0, grid)
        assert np.max(np.abs(y - out.Y)) <= 1e-2 * np.max(np.abs(y))

    def test_resonant_forcing_grows(self):
        # at omega = pi the cascade still runs; the output envelope grows
        g = build_grid(20, 0.02, 3.0)
        q = np.sin(np.pi * g.nodes)
        q[0] = q[-1] = 0.0
        out = simulate_cascade(q, np.pi, g)
        n = g.n_steps_per_pass
        e1 = np.max(np.abs(out.Y[: n // 3]))
        e2 = np.max(np.abs(out.Y[n // 3 : 2 * n // 3]))
        e3 = np.max(np.abs(out.Y[2 * n // 3 :]))
        assert e1 < e2 < e3
        # and it matches the quadrature oracle driven by the same trace
        zo = oscillator_closed_form(np.pi, out.trace, g.dt, OscillatorState(0, 0, 0), g.T)
        assert out.Y[-1] == pytest.approx(zo.z1, abs=1e-4)


class TestPlantCycle:
    def test_exact_periodicity(self, grid):
        # z1, z2 return to zero at the cycle end; z3 keeps accumulating
        q = poly_source(grid)
        plant = run_plant_cycle(q, 2.0, grid)
        assert abs(plant.z[-1, 0]) <= 1e-12
        assert abs(plant.z[-1, 1]) <= 1e-12

    def test_two_cycle_field_return(self, grid):
        # periodized truth returns to (q, 0) at every t = 2kT
        from bfwave.leapfrog import reversed_state, step

        q = poly_source(grid)
        state = init_leapfrog(q, None, None, grid, "forward")
        for _cycle in range(2):
            for _half in range(2):
                for _ in range(grid.n_steps_per_pass):
                    state = step(state, 0.0, None, grid)
                state = reversed_state(state, None, grid)
            assert np.max(np.abs(state.u_curr - q)) <= 1e-12


class TestExtendedMeasurement:
    def test_indexing(self, grid):
        n = grid.n_steps_per_pass
        y = np.arange(n + 1, dtype=float)
        em = ExtendedMeasurement(MeasurementRecord(y=y, dt=grid.dt, T=grid.T), n)
        assert extended_output(em, 0, 0) == 0.0
        assert extended_output(em, 0, 5) == 5.0
        assert extended_output(em, 1, 0) == n  # backward pass starts at y(T)
        assert extended_output(em, 1, n) == 0.0
        assert extended_output(em, 2, 3) == 3.0

    def test_reversal_is_permutation(self, grid):
        n = grid.n_steps_per_pass
        y = np.sin(np.arange(n + 1.0))
        em = ExtendedMeasurement(MeasurementRecord(y=y, dt=grid.dt, T=grid.T), n)
        fwd = [extended_output(em, 0, k) for k in range(n + 1)]
        back = [extended_output(em, 1, k) for k in range(n + 1)]
        assert sorted(fwd) == sorted(back)

    def test_range_check(self, grid):
        n = grid.n_steps_per_pass
        em = ExtendedMeasurement(zero_measurement(grid), n)
        with pytest.raises(IndexError):
            em.value(0, n + 1)

    def test_length_check(self, grid):
        with pytest.raises(ValueError):
            ExtendedMeasurement(
                MeasurementRecord(y=np.zeros(5), dt=grid.dt, T=grid.T), grid.n_steps_per_pass
            )


class TestObserverHalfPass:
    def test_zero_everything_stays_zero(self, grid):
        em = ExtendedMeasurement(zero_measurement(grid), grid.n_steps_per_pass)
        s = initial_observer_state(grid)
        for _ in range(4):
            s = observer_half_pass(s, em, Gains(1.0, 0.5), 2.0, grid)
            assert not s.wave.u_curr.any()
            assert s.osc == OscillatorState(0.0, 0.0, 0.0)

    def test_finite_propagation_cone(self):
        # the injected boundary signal crosses at most one node per step
        g = build_grid(20, 0.9, 0.5)
        n = g.n_steps_per_pass
        assert n < g.nx - 1
        y = np.ones(n + 1)
        y[0] = 0.0
        em = ExtendedMeasurement(MeasurementRecord(y=y, dt=g.dt, T=g.T), n)
        s = observer_half_pass(initial_observer_state(g), em, Gains(1.0, 0.5), 2.0, g)
        u = s.wave.u_curr
        assert np.max(np.abs(u[n:])) == 0.0
        assert np.max(np.abs(u[:n])) > 0.0

    def test_vanishing_gain_reversibility(self, grid):
        # with negligible injection, forward+backward retraces the zero start
        q = poly_source(grid)
        m = simulate_forward(q, 2.0, grid)
        em = ExtendedMeasurement(m, grid.n_steps_per_pass)
        s = initial_observer_state(grid)
        tiny = Gains(1e-12, 1e-12)
        s = observer_half_pass(s, em, tiny, 2.0, grid)
        s = observer_half_pass(s, em, tiny, 2.0, grid)
        assert np.max(np.abs(s.wave.u_curr)) <= 1e-9

    def test_direction_mismatch_rejected(self, grid):
        em = ExtendedMeasurement(zero_measurement(grid), grid.n_steps_per_pass)
        s = initial_observer_state(grid)
        s.direction = "backward"
        with pytest.raises(ValueError):
            observer_half_pass(s, em, Gains(1.0, 0.5), 2.0, grid)

    def test_matches_driver(self, grid):
        # composing the public half-pass reproduces the fused driver exactly
        q = poly_source(grid)
        m = simulate_forward(q, 2.0, grid)
        em = ExtendedMeasurement(m, grid.n_steps_per_pass)
        gains = Gains(1.0, 0.5)
        s = initial_observer_state(grid)
        s = observer_half_pass(s, em, gains, 2.0, grid)
        s = observer_half_pass(s, em, gains, 2.0, grid)
        res = run_back_and_forth(m, gains, 2.0, grid, 1)
        fin = res.final_state
        assert np.array_equal(s.wave.u_curr, fin.wave.u_curr)
        assert np.array_equal(s.wave.u_prev, fin.wave.u_prev)
        assert s.osc == fin.osc
        assert s.y_integral == fin.y_integral
        assert np.array_equal(extract_estimate(s, grid), res.estimates[1])


class TestRunBackAndForth:
    def test_zero_measurement_zero_estimates(self, grid):
        res = run_back_and_forth(zero_measurement(grid), Gains(1.0, 0.5), 2.0, grid, 3)
        assert len(res.estimates) == 4
        for q_hat in res.estimates:
            assert not q_hat.any()

    def test_determinism(self, grid):
        q = poly_source(grid)
        m = simulate_forward(q, 2.0, grid)
        a = run_back_and_forth(m, Gains(1.0, 0.5), 2.0, grid, 2, q_true=q)
        b = run_back_and_forth(m, Gains(1.0, 0.5), 2.0, grid, 2, q_true=q)
        for qa, qb in zip(a.estimates, b.estimates):
            assert np.array_equal(qa, qb)
        assert np.array_equal(a.history.lyapunov, b.history.lyapunov)

    def test_estimate_endpoints_pinned(self, reduced_run):
        for q_hat in reduced_run["result"].estimates:
            assert q_hat[0] == 0.0 and q_hat[-1] == 0.0

    def test_injection_invariant_at_final_state(self, reduced_run):
        # x=0 node of the observer wave equals the injection formula
        res = reduced_run["result"]
        m = reduced_run["measurement"]
        s = res.final_state
        bc = injection_value(s.osc, float(m.y[0]), s.y_integral, Gains(1.0, 0.5))
        assert s.wave.u_curr[0] == pytest.approx(bc, abs=1e-13)

    def test_error_decreases(self, reduced_run):
        reports = reduced_run["result"].reports
        assert reports[-1].l2_err < 0.5 * reports[0].l2_err

    def test_reports_without_truth(self, grid):
        q = poly_source(grid)
        m = simulate_forward(q, 2.0, grid)
        res = run_back_and_forth(m, Gains(1.0, 0.5), 2.0, grid, 1)
        assert res.history is None
        assert res.reports[-1].l2_err is None
        assert res.reports[-1].seconds is not None and res.reports[-1].seconds > 0

    def test_short_horizon_warns(self):
        g = build_grid(10, 0.1, 1.5)
        m = MeasurementRecord(y=np.zeros(g.n_steps_per_pass + 1), dt=g.dt, T=g.T)
        with pytest.warns(UserWarning, match="observability"):
            run_back_and_forth(m, Gains(1.0, 0.5), 2.0, g, 1)

    def test_sampling_mismatch_rejected(self, grid):
        m = MeasurementRecord(y=np.zeros(11), dt=grid.dt, T=grid.T)
        with pytest.raises(ValueError):
            run_back_and_forth(m, Gains(1.0, 0.5), 2.0, grid, 1)

    @given(c=st.floats(-4.0, 4.0))
    @settings(max_examples=10)
    def test_linear_in_measurement(self, c, grid):
        # from the zero start, every observer component is linear in y
        q = poly_source(grid)
        m = simulate_forward(q, 2.0, grid)
        scaled = MeasurementRecord(y=c * m.y, dt=m.dt, T=m.T, omega=m.omega)
        a = run_back_and_forth(m, Gains(1.0, 0.5), 2.0, grid, 1)
        b = run_back_and_forth(scaled, Gains(1.0, 0.5), 2.0, grid, 1)
        assert np.allclose(b.estimates[1], c * a.estimates[1], atol=1e-12)

    def test_intra_pass_lyapunov_sampling(self, grid):
        q = poly_source(grid)
        m = simulate_forward(q, 2.0, grid)
        res = run_back_and_forth(
            m, Gains(1.0, 0.5), 2.0, grid, 1, q_true=q, lyapunov_stride=20
        )
        h = res.history
        assert h.intra_lyapunov is not None and len(h.intra_lyapunov) > 10
        # intra-pass values interleave continuously with the boundary samples
        assert h.intra_lyapunov.max() <= h.lyapunov[0] * 1.05


class TestExtractEstimate:
    def test_zero_state(self, grid):
        s = initial_observer_state(grid)
        assert not extract_estimate(s, grid).any()

    def test_mid_cycle_rejected(self, grid):
        em = ExtendedMeasurement(zero_measurement(grid), grid.n_steps_per_pass)
        s = observer_half_pass(initial_observer_state(grid), em, Gains(1, 0.5), 2.0, grid)
        with pytest.raises(ValueError):
            extract_estimate(s, grid)
