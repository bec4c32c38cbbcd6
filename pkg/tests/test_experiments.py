import mpmath
import numpy as np
import pytest

import pressure_consensus as pc
from pressure_consensus import Classification, ScalarFamily
from oracles import k2_orbit_mp, sup_residual_floor_mp

# min over k in [1000, 10000] of ||x_k - (0.3, 0.3)||_inf for the oscillating
# run, from a 50-digit re-simulation.
OSCILLATION_FLOOR = 0.0047507736405010352857


@pytest.fixture(scope="module")
def oscillating():
    return pc.run_counterexample(10_000)


@pytest.fixture(scope="module")
def converging():
    return pc.run_convergent(10_000)


class TestCounterexample:
    def test_not_converged(self, oscillating):
        assert not oscillating.converged
        assert oscillating.residual_floor > 0
        assert oscillating.final_residual >= oscillating.tolerance

    def test_product(self, oscillating):
        assert abs(oscillating.report.partial_product_final - 0.0310128) <= 1e-4
        assert oscillating.report.classification is Classification.POSITIVE_LIMIT_SUSPECTED

    def test_floor_matches_independent_resimulation(self, oscillating):
        orbit = k2_orbit_mp("0.1", "0.5", lambda k: mpmath.mpf(2) ** mpmath.sqrt(k), 10_000)
        oracle = float(sup_residual_floor_mp(orbit, "0.3", 1000, 10_000))
        assert oracle == pytest.approx(OSCILLATION_FLOOR, rel=1e-15)
        assert abs(oscillating.residual_floor - oracle) <= 1e-10

    def test_deterministic_prefix(self, oscillating):
        short = pc.run_counterexample(100)
        np.testing.assert_array_equal(short.trajectory.states, oscillating.trajectory.states[:101])

    def test_sign_alternates(self, oscillating):
        dev = oscillating.trajectory.states[:, 0] - 0.3
        window = dev[100:]
        assert np.all(window != 0)
        assert np.all(np.sign(window[1:]) == -np.sign(window[:-1]))

    def test_alphas_consistent(self, oscillating):
        rho = oscillating.trajectory.rho
        idx = [0, 9, 99, 999, 9999]
        direct = [pc.contraction_constant(pc.k2_system(), rho[i]) for i in idx]
        np.testing.assert_allclose(oscillating.report.alphas[idx], direct, rtol=0, atol=1e-12)

    def test_bound_holds(self, oscillating):
        assert oscillating.bound_slack.min() >= -1e-9

    def test_requires_enough_steps(self):
        with pytest.raises(ValueError):
            pc.run_counterexample(99)


class TestConvergent:
    def test_converged(self, converging):
        assert converging.converged
        assert np.max(np.abs(converging.trajectory.states[-1] - 0.3)) < 1e-3

    def test_short_run_not_converged(self):
        result = pc.run_scenario(pc.k2_system(), pc.PressureSchedule.linear(), 10)
        assert not result.converged

    def test_product_telescopes(self, converging):
        assert converging.report.partial_product_final == pytest.approx(1 / 10_001, rel=1e-12)

    def test_tail_envelope_shrinks(self, converging):
        # The iterates oscillate in sign, so monotonicity is checked on the
        # running maximum of the remaining residuals.
        resid = converging.residuals[1000:]
        envelope = np.maximum.accumulate(resid[::-1])[::-1]
        assert np.all(np.diff(envelope) <= 0)
        assert envelope[-1] < envelope[0] / 5

    def test_bound_holds(self, converging):
        assert converging.bound_slack.min() >= -1e-9


def test_determinism():
    a, b = pc.run_counterexample(500), pc.run_counterexample(500)
    np.testing.assert_array_equal(a.trajectory.states, b.trajectory.states)
    np.testing.assert_array_equal(a.report.partial_products, b.report.partial_products)
    assert a.summary() == b.summary()


class TestScalarScenario:
    def test_geometric(self):
        res = pc.run_scalar_family(ScalarFamily.geometric_gap(0.1), 1.0, 200)
        assert abs(res.estimate - 0.89001) <= 1e-5
        assert not res.converged

    def test_telescoping(self):
        res = pc.run_scalar_family(ScalarFamily.telescoping(), 1.0, 10_000)
        assert res.estimate == pytest.approx(1e-4, rel=1e-12)
        assert np.all(np.diff(np.abs(res.values)) < 0)

    def test_start_at_fixed_point(self):
        res = pc.run_scalar_family(ScalarFamily.geometric_gap(0.1), 0.0, 200)
        assert res.estimate == 0.0 and res.converged

    def test_summary(self):
        summary = pc.run_scalar_family(ScalarFamily.geometric_gap(0.1), 1.0, 50).summary()
        assert summary["family"] == "GeometricGap"
        assert summary["euler_phi"] == pytest.approx(0.89001, abs=1e-5)
