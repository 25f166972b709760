import numpy as np
import pytest
from scipy.stats import chi2

from lmbp.models import BirthModel, ClutterModel, MotionModel, SensorModel, wrap_angle
from lmbp.rfs import Measurement


def make_sensor(**kw):
    defaults = dict(position=np.array([0.0, -50.0]), max_range=300.0, sigma_range=2.0,
                    sigma_bearing=np.deg2rad(1.0), pd_max=0.7, pd_scale=450.0)
    defaults.update(kw)
    return SensorModel(**defaults)


class TestMotionModel:
    def test_noiseless_advances_position_by_velocity(self):
        model = MotionModel(sigma_u=0.0)
        out = model.transition_sample(np.array([0.0, 0.0, 1.0, 0.0]),
                                      np.random.default_rng(0))
        np.testing.assert_allclose(out, [1, 0, 1, 0])

    def test_zero_velocity_fixed_point(self):
        model = MotionModel(sigma_u=0.0)
        out = model.transition_sample(np.array([5.0, -3.0, 0.0, 0.0]),
                                      np.random.default_rng(0))
        np.testing.assert_allclose(out, [5, -3, 0, 0])

    def test_noise_covariance_matches_model(self):
        # oracle: Monte-Carlo covariance of A x + W u equals W W^T sigma_u^2
        sigma_u = 0.01
        model = MotionModel(sigma_u=sigma_u)
        rng = np.random.default_rng(1)
        start = np.tile([10.0, -20.0, 0.5, 0.25], (100_000, 1))
        out = model.transition_sample(start, rng)
        expected = model.W @ model.W.T * sigma_u ** 2
        sample_cov = np.cov(out.T)
        scale = sigma_u ** 2
        assert np.all(np.abs(sample_cov - expected) <= 0.1 * scale + 1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            MotionModel(sigma_u=-1.0)
        with pytest.raises(ValueError):
            MotionModel(p_survival=1.2)


class TestDetectionProb:
    def test_peak_at_sensor(self):
        sensor = make_sensor(pd_max=0.7)
        assert sensor.detection_prob(np.array([0.0, -50.0, 0, 0])) == pytest.approx(0.7)

    def test_border_value_ts1(self):
        # 0.7 * exp(-300^2/450^2) = 0.449 at the sensor-disk border
        sensor = make_sensor(pd_max=0.7)
        val = sensor.detection_prob(np.array([300.0, -50.0, 0, 0]))
        assert val == pytest.approx(0.449, abs=5e-4)

    def test_border_value_ts2(self):
        sensor = make_sensor(pd_max=0.5)
        val = sensor.detection_prob(np.array([0.0, 250.0, 0, 0]))
        assert val == pytest.approx(0.320, abs=1e-3)

    def test_monotone_in_distance(self):
        sensor = make_sensor()
        dists = np.linspace(0, 400, 100)
        states = np.zeros((100, 4))
        states[:, 0] = dists
        states[:, 1] = -50.0
        vals = sensor.detection_prob(states)
        assert np.all(np.diff(vals) <= 0)
        assert np.all(vals > 0) and np.all(vals <= sensor.pd_max)


class TestLikelihood:
    def test_peak_value(self):
        sensor = make_sensor()
        state = np.array([100.0, -50.0, 0, 0])
        rho, theta = sensor.range_bearing(state)
        z = Measurement(float(rho), float(theta))
        expected = 1.0 / (2 * np.pi * sensor.sigma_range * sensor.sigma_bearing)
        assert sensor.likelihood(z, state) == pytest.approx(expected, rel=1e-12)

    def test_bearing_wrap_symmetry(self):
        sensor = make_sensor(sigma_bearing=0.5)
        state = np.array([-100.0, -50.0, 0, 0])  # true bearing = pi
        rho, theta = sensor.range_bearing(state)
        near_pi = sensor.likelihood(Measurement(float(rho), np.pi - 1e-3), state)
        near_minus_pi = sensor.likelihood(Measurement(float(rho), -np.pi + 1e-3), state)
        assert near_pi == pytest.approx(near_minus_pi, rel=1e-6)

    def test_one_sigma_offset(self):
        sensor = make_sensor(sigma_range=2.0, sigma_bearing=np.pi / 180)
        state = np.array([100.0, -50.0, 0, 0])
        rho, theta = sensor.range_bearing(state)
        z = Measurement(float(rho) + 2.0, float(theta))
        peak = 1.0 / (2 * np.pi * sensor.sigma_range * sensor.sigma_bearing)
        assert sensor.likelihood(z, state) == pytest.approx(peak * np.exp(-0.5), rel=1e-12)

    def test_table_matches_single_evaluations(self):
        sensor = make_sensor()
        rng = np.random.default_rng(31)
        states = rng.uniform(-200, 200, (50, 4))
        frame = [Measurement(float(rng.uniform(0, 300)),
                             float(rng.uniform(-np.pi, np.pi))) for _ in range(7)]
        table = sensor.likelihood_table(frame, states)
        for m, z in enumerate(frame):
            np.testing.assert_allclose(table[m], sensor.likelihood(z, states),
                                       rtol=1e-12)

    def test_integrates_to_one(self):
        # numeric quadrature over (range, bearing) within 1%
        sensor = make_sensor()
        state = np.array([120.0, 30.0, 0, 0])
        rho0, _ = sensor.range_bearing(state)
        r_grid = np.linspace(rho0 - 10 * sensor.sigma_range,
                             rho0 + 10 * sensor.sigma_range, 400)
        b_grid = np.linspace(-np.pi, np.pi, 2000, endpoint=False)
        vals = np.array([[sensor.likelihood(Measurement(r, b), state) for r in r_grid]
                         for b in b_grid])
        integral = np.trapezoid(np.trapezoid(vals, r_grid, axis=1), b_grid)
        assert integral == pytest.approx(1.0, rel=0.01)


class TestClutter:
    def test_intensity_value(self):
        clutter = ClutterModel(mean_count=100.0, max_range=300.0)
        z = Measurement(100.0, 0.3)
        assert clutter.intensity(z) == pytest.approx(100.0 / (300.0 * 2 * np.pi))
        assert clutter.intensity(z) == pytest.approx(0.05305, abs=2e-5)

    def test_outside_support(self):
        clutter = ClutterModel(mean_count=100.0, max_range=300.0)
        assert clutter.intensity(Measurement(301.0, 0.0)) == 0.0

    def test_zero_rate(self):
        clutter = ClutterModel(mean_count=0.0, max_range=300.0)
        assert clutter.intensity(Measurement(10.0, 0.0)) == 0.0

    def test_density_integrates_to_one_over_roi(self):
        clutter = ClutterModel(mean_count=1.0, max_range=300.0)
        assert clutter.density * clutter.max_range * 2 * np.pi == pytest.approx(1.0)


class TestBirthModel:
    def test_budget_and_total_weight(self):
        birth = BirthModel(mean_births=0.1, particle_budget=5000)
        motion = MotionModel()
        sensor = make_sensor()
        rng = np.random.default_rng(0)
        phd = birth.sample_phd([Measurement(100.0, 0.0)], motion, sensor, rng)
        assert len(phd.particles) == 5000
        np.testing.assert_allclose(phd.particles.weights, 2e-5)
        assert phd.mean == pytest.approx(0.1, abs=1e-12)

    def test_noiseless_inversion(self):
        birth = BirthModel(mean_births=0.1, velocity_sigma=0.0, particle_budget=200)
        motion = MotionModel(sigma_u=0.0)
        sensor = make_sensor(sigma_range=1e-12, sigma_bearing=1e-12)
        rng = np.random.default_rng(1)
        phd = birth.sample_phd([Measurement(100.0, 0.0)], motion, sensor, rng)
        expected = sensor.position + np.array([100.0, 0.0])
        np.testing.assert_allclose(phd.particles.states[:, :2],
                                   np.tile(expected, (200, 1)), atol=1e-6)
        np.testing.assert_allclose(phd.particles.states[:, 2:], 0.0, atol=1e-9)

    def test_empty_measurements_uniform_over_disk(self):
        # chi-square uniformity over radius^2 x angle bins at the 1% level
        birth = BirthModel(mean_births=0.1, particle_budget=10_000)
        motion = MotionModel()
        sensor = make_sensor()
        rng = np.random.default_rng(2)
        phd = birth.sample_phd([], motion, sensor, rng)
        rel = phd.particles.states[:, :2] - sensor.position
        radius = np.linalg.norm(rel, axis=1)
        angle = np.arctan2(rel[:, 1], rel[:, 0])
        assert np.all(radius <= sensor.max_range)
        r_bins = np.digitize((radius / sensor.max_range) ** 2, np.linspace(0, 1, 11)[1:-1])
        a_bins = np.digitize(angle, np.linspace(-np.pi, np.pi, 9)[1:-1])
        counts = np.bincount(r_bins * 8 + a_bins, minlength=80)
        expected = 10_000 / 80
        stat = float(np.sum((counts - expected) ** 2 / expected))
        assert stat < chi2.ppf(0.99, 79)


def test_wrap_angle_half_open_interval():
    assert wrap_angle(np.pi) == pytest.approx(-np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(-np.pi)
    assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    np.testing.assert_allclose(wrap_angle(np.array([0.1, 2 * np.pi + 0.1])), 0.1)
