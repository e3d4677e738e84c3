import math

import numpy as np
import pytest
from scipy.special import erfc

from hygrotherm.dehydration import d_step
from hygrotherm.errors import ConfigError, SolverError
from hygrotherm.fire import BoundaryParams, ConstantAmbient, ISO834
from hygrotherm.materials import DEFAULT_PARAMS, sorption_pressure, sorption_pressure_derivatives
from hygrotherm.solver import (Forcing, FrozenCoefficients, Mesh1D, Problem, SolverOptions,
                               Stepper, SystemState, initial_state, simulate, step)

from conftest import THETA0, W0, relative_drift


def equilibrium_problem(**kw):
    return Problem(scenario=ConstantAmbient(), **kw)


class TestMeshAndInitialState:
    def test_default_mesh(self):
        mesh = Mesh1D()
        assert mesh.n_nodes == 241
        assert mesh.x[0] == 0.0 and mesh.x[-1] == pytest.approx(0.12)
        assert mesh.lumped_mass.sum() == pytest.approx(0.12)

    @pytest.mark.parametrize("kw", [dict(ell=0.0), dict(n_elements=1), dict(ell=-1.0)])
    def test_invalid_mesh(self, kw):
        with pytest.raises(ConfigError):
            Mesh1D(**kw)

    def test_uniform_defaults(self):
        st = initial_state(Mesh1D(), THETA0, W0)
        assert st.theta.shape == (241,)
        assert np.all(st.theta == THETA0) and np.all(st.w == W0) and np.all(st.d == 0)
        assert st.t == 0.0

    def test_profile_interpolated_exactly_on_nodes(self):
        mesh = Mesh1D(0.12, 12)
        st = initial_state(mesh, lambda x: 293.15 + 100 * x, W0)
        np.testing.assert_array_equal(st.theta, 293.15 + 100 * mesh.x)

    def test_zero_temperature_rejected(self):
        mesh = Mesh1D(0.12, 4)
        with pytest.raises(ConfigError):
            initial_state(mesh, np.array([293.15, 0.0, 293.15, 293.15, 293.15]), W0)

    def test_invalid_options(self):
        with pytest.raises(ConfigError):
            SolverOptions(advection="central")
        with pytest.raises(ConfigError):
            SolverOptions(monitor_policy="ignore")
        with pytest.raises(ConfigError):
            Problem(dt=-1.0)


class TestFixedPoint:
    def test_single_step_preserves_equilibrium(self, w_equilibrium):
        pr = equilibrium_problem()
        st = initial_state(pr.mesh, THETA0, w_equilibrium)
        new, report = step(st, pr)
        assert relative_drift(new.theta, st.theta) <= 1e-12
        assert relative_drift(new.w, st.w) <= 1e-12
        assert np.all(new.d == 0)
        assert report.violations == ()

    def test_diagnostics(self, w_equilibrium):
        pr = equilibrium_problem()
        _, report = step(initial_state(pr.mesh, THETA0, w_equilibrium), pr)
        assert abs(report.heat_flux_out) < 1e-6
        assert abs(report.moisture_flux_out) < 1e-9
        assert report.residual_w <= 1e-10 and report.residual_theta <= 1e-6
        assert "res_w=" in report.log_line()


class TestOneStep:
    def test_locality_of_first_step(self):
        pr = Problem()
        st = initial_state(pr.mesh, THETA0, W0)
        new, _ = step(st, pr)
        assert new.theta[-1] > THETA0
        assert abs(new.theta[0] - THETA0) <= 1e-12 * THETA0

    def test_moisture_system_diagonally_dominant(self):
        pr = Problem()
        stepper = Stepper(pr)
        st = initial_state(pr.mesh, THETA0, W0)
        p, dp_dw, coeffs = stepper.coefficients(st)
        d_new = d_step(st.d, st.theta, pr.dt, pr.mp.tau, pr.mp)
        msys, _ = stepper.assemble_moisture(st, d_new, p, dp_dw, coeffs, st.theta, pr.dt)
        assert msys.is_diagonally_dominant()

    def test_moisture_mass_balance(self):
        # column sums of diffusion and donor-cell transport vanish, so the
        # storage change equals the exposed-face flux plus the dehydration gain
        pr = Problem(mesh=Mesh1D(0.12, 60), dt=5.0)
        # the hot end lies in the dehydration range
        st = initial_state(pr.mesh, lambda x: 293.15 + 8000.0 * x, W0)
        new, report = step(st, pr)
        m = pr.mesh.lumped_mass
        storage = m @ (new.w - st.w)
        gain = m @ (new.d - st.d)
        assert storage == pytest.approx(gain - pr.dt * report.moisture_flux_out, rel=1e-10, abs=1e-12)

    def test_temporal_self_convergence(self):
        def run(dt):
            pr = Problem(dt=dt)
            return simulate(pr, initial_state(pr.mesh, THETA0, W0), 8.0,
                            snapshot_times=(8.0,)).snapshots[-1]

        ref = run(8.0 / 512)
        errs = [np.max(np.abs(run(dt).theta - ref.theta)) for dt in (1.0, 0.5)]
        assert errs[0] / errs[1] == pytest.approx(2.0, abs=0.3)


class TestHandAssembly:
    """Three nodes, frozen coefficients, centered transport."""

    frozen = FrozenCoefficients(delta_w=2e-6, delta_theta=3e-7, lam=1.7)

    def setup_problem(self):
        pr = Problem(mesh=Mesh1D(0.12, 2), scenario=ConstantAmbient(), dt=10.0,
                     options=SolverOptions(advection="centered", frozen=self.frozen))
        x = pr.mesh.x
        st = SystemState(0.0, 293.15 + 50.0 * x, 60.0 + 100.0 * x, np.zeros(3))
        return pr, st

    def test_moisture(self):
        pr, st = self.setup_problem()
        stepper = Stepper(pr)
        p, dp_dw, coeffs = stepper.coefficients(st)
        msys, _ = stepper.assemble_moisture(st, st.d, p, dp_dw, coeffs, st.theta, pr.dt)

        h, dt, f = 0.06, pr.dt, self.frozen
        m = np.array([h / 2, h, h / 2])
        a = f.delta_w / h
        A = np.diag(m / dt) + a * np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
        flux = f.delta_theta * 50.0  # delta_theta * theta_x, both elements
        b = m * st.w / dt + np.array([flux, 0.0, -flux])
        p_old = sorption_pressure(st.theta[-1], st.w[-1])
        _, slope_w = sorption_pressure_derivatives(st.theta[-1], st.w[-1])
        intercept = min(p_old - slope_w * st.w[-1], pr.bp.P_inf)
        A[2, 2] += pr.bp.beta_c * (p_old - intercept) / st.w[-1]
        b[2] += pr.bp.beta_c * (pr.bp.P_inf - intercept)
        np.testing.assert_allclose(msys.to_dense(), A, rtol=1e-12)
        np.testing.assert_allclose(msys.rhs, b, rtol=1e-12)

    def test_energy(self):
        pr, st = self.setup_problem()
        stepper = Stepper(pr)
        _, _, coeffs = stepper.coefficients(st)
        w_new = st.w + 1.0
        q = np.array([1e-4, -2e-4])
        esys = stepper.assemble_energy(st, w_new, st.d, q, coeffs, pr.dt)

        mp, bp, f = pr.mp, pr.bp, self.frozen
        h, dt = 0.06, pr.dt
        m = np.array([h / 2, h, h / 2])
        cap = mp.C_w * w_new + mp.rho_S * mp.C_S
        A = np.diag(m * cap / dt) + f.lam / h * np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
        # -C_w q theta_x, split evenly between the two nodes of each element
        for e in range(2):
            k = mp.C_w * q[e] / 2
            A[e, e] += k
            A[e, e + 1] -= k
            A[e + 1, e] += k
            A[e + 1, e + 1] -= k
        A[2, 2] += bp.alpha_c + bp.e * bp.sigma * st.theta[-1] ** 3
        b = m * cap * st.theta / dt
        b[2] += bp.alpha_c * 293.15 + bp.e * bp.sigma * 293.15**4
        np.testing.assert_allclose(esys.to_dense(), A, rtol=1e-12)
        np.testing.assert_allclose(esys.rhs, b, rtol=1e-12)


class TestConductionOracle:
    def test_semi_infinite_slab(self):
        lam, th_inf = 1.5, 370.0  # below the dehydration onset
        pr = Problem(scenario=ConstantAmbient(th_inf), bp=BoundaryParams(alpha_c=1e8),
                     options=SolverOptions(frozen=FrozenCoefficients(0.0, 0.0, lam)))
        snap = simulate(pr, initial_state(pr.mesh, THETA0, W0), 600.0,
                        snapshot_times=(600.0,)).snapshots[-1]
        cap = pr.mp.C_w * W0 + pr.mp.rho_S * pr.mp.C_S
        x = pr.mesh.x
        exact = THETA0 + (th_inf - THETA0) * erfc((0.12 - x) / (2 * math.sqrt(lam / cap * 600.0)))
        i = int(np.argmin(np.abs(x - 0.11)))
        assert (snap.theta[i] - THETA0) == pytest.approx(exact[i] - THETA0, rel=0.02)


class TestSimulate:
    def test_zero_end_time(self):
        pr = Problem()
        series = simulate(pr, initial_state(pr.mesh, THETA0, W0), 0.0, snapshot_times=(0.0,))
        assert series.times == [0.0]
        assert np.all(series.snapshots[0].theta == THETA0)
        assert series.monitor["steps"] == 0

    def test_end_time_must_be_multiple_of_dt(self):
        pr = Problem()
        with pytest.raises(ConfigError):
            simulate(pr, initial_state(pr.mesh, THETA0, W0), 1.2)

    def test_snapshot_and_probe_ranges(self):
        pr = Problem()
        st = initial_state(pr.mesh, THETA0, W0)
        with pytest.raises(ConfigError):
            simulate(pr, st, 1.0, snapshot_times=(5.0,))
        with pytest.raises(ConfigError):
            simulate(pr, st, 1.0, probes=(0.2,))

    def test_probes_interpolate_linearly(self):
        pr = Problem(mesh=Mesh1D(0.12, 12))
        st = initial_state(pr.mesh, lambda x: 293.15 + 100 * x, W0)
        series = simulate(pr, st, 0.0, probes=(0.015,))
        assert series.probe_values[0][0] == pytest.approx(293.15 + 1.5, rel=1e-14)

    def test_dense_output(self):
        pr = Problem(options=SolverOptions(dense_output=True))
        series = simulate(pr, initial_state(pr.mesh, THETA0, W0), 2.0)
        assert [s.t for s in series.dense] == [0.0, 0.5, 1.0, 1.5, 2.0]
        assert len(series.reports) == 4

    @pytest.mark.parametrize("opts", [dict(advection="centered"), dict(coupling_theta="predictor"),
                                      dict(boundary_enthalpy_term=True)])
    def test_alternative_switches_run(self, opts):
        pr = Problem(options=SolverOptions(**opts))
        series = simulate(pr, initial_state(pr.mesh, THETA0, W0), 5.0)
        assert series.monitor["passed"]

    def test_monitor_abort_policy(self):
        # a tolerance every state violates exercises the policy switch
        pr = Problem(options=SolverOptions(monitor_policy="abort", negative_tolerance=-1.0))
        with pytest.raises(SolverError):
            simulate(pr, initial_state(pr.mesh, THETA0, W0), 1.0)

    def test_monitor_warn_policy_records(self, caplog):
        pr = Problem(options=SolverOptions(negative_tolerance=-1.0))
        series = simulate(pr, initial_state(pr.mesh, THETA0, W0), 1.0)
        assert not series.monitor["passed"]
        assert series.monitor["violations"] == 2
        assert series.monitor["first_violation"]["t"] == 0.5
        assert "monitor violation" in caplog.text

    def test_non_finite_state_aborts(self):
        pr = Problem(forcing=Forcing(source_w=lambda x, t: np.full_like(x, np.nan)))
        with pytest.raises(SolverError):
            simulate(pr, initial_state(pr.mesh, THETA0, W0), 0.5)

    def test_norms_logged(self):
        pr = Problem()
        series = simulate(pr, initial_state(pr.mesh, THETA0, W0), 1.0)
        norms = series.norms.as_dict()
        assert norms["theta_Linf_L2"] >= THETA0 * math.sqrt(0.12) * (1 - 1e-12)
        assert all(np.isfinite(v) for v in norms.values())


class TestFullRuns:
    def test_iso_completes_with_monitors(self, iso_run):
        _, series = iso_run
        assert series.monitor["steps"] == 3600
        assert series.monitor["passed"]
        assert series.times == [900.0, 1800.0]

    def test_dehydration_develops_near_surface(self, iso_run):
        _, series = iso_run
        snap = series.at(1800.0)
        assert snap.d[-1] > 0 and snap.d[0] == 0
        assert np.all(snap.d <= DEFAULT_PARAMS.d_eq_scale)

    def test_parametric_surface_peak_before_end(self, pm_run):
        _, series = pm_run
        surface = np.array(series.probe_values)[:, 0]
        assert int(np.argmax(surface)) < surface.size - 1
