"""Allan deviation tests against a brute-force double-sum oracle and
analytic noise laws."""

import math

import numpy as np
import pytest

from rigkit.allan import (
    AllanCurve,
    ImuLog,
    aggregate_params,
    allan_deviation,
    characterize_axes,
    default_tau_grid,
    estimate_noise_density,
    estimate_random_walk,
    read_imu_csv,
    write_curve_csv,
)
from rigkit.errors import (
    EmptyStreamError,
    NoRandomWalkRegionError,
    NoWhiteNoiseRegionError,
    ParseError,
    TooShortError,
)


def brute_force_adev(y, m):
    """Direct evaluation of the overlapping Allan deviation definition."""
    y = np.asarray(y, dtype=float)
    n = y.size
    ybar = np.array([y[k : k + m].mean() for k in range(n - m + 1)])
    total = sum((ybar[k + m] - ybar[k]) ** 2 for k in range(n - 2 * m))
    return math.sqrt(total / (2.0 * (n - 2 * m)))


# --- the estimator itself -------------------------------------------------

def test_matches_brute_force_small_fixture():
    rng = np.random.default_rng(1)
    y = rng.normal(0, 1.0, 64)
    rate = 8.0
    curve = allan_deviation(y, rate, taus_s=[4 / rate])
    want = brute_force_adev(y, 4)
    assert abs(curve.adev[0] - want) / want < 1e-12


def test_matches_brute_force_across_taus():
    rng = np.random.default_rng(2)
    y = rng.normal(0, 0.5, 1000) + 0.003 * np.cumsum(rng.normal(0, 1, 1000))
    rate = 50.0
    curve = allan_deviation(y, rate)
    for tau, adev in zip(curve.taus_s, curve.adev):
        m = int(round(tau * rate))
        want = brute_force_adev(y, m)
        assert abs(adev - want) / want < 1e-12


def test_constant_signal_zero_deviation():
    curve = allan_deviation(np.full(500, 3.7), 10.0)
    assert np.all(curve.adev == 0.0)


def test_scaling_property():
    rng = np.random.default_rng(3)
    y = rng.normal(0, 1, 2000)
    a = allan_deviation(y, 100.0)
    b = allan_deviation(2.5 * y, 100.0)
    assert np.allclose(b.adev, 2.5 * a.adev, rtol=1e-12)


def test_reported_taus_are_realized_cluster_times():
    curve = allan_deviation(np.random.default_rng(4).normal(size=300), 30.0)
    ms = np.rint(curve.taus_s * 30.0)
    assert np.allclose(curve.taus_s, ms / 30.0)
    assert np.all(np.diff(curve.taus_s) > 0)


def test_cluster_counts():
    n, rate = 100, 10.0
    curve = allan_deviation(np.arange(n, dtype=float), rate, taus_s=[0.2, 1.0])
    assert list(curve.n_clusters) == [n - 2 * 2, n - 2 * 10]


def test_default_grid_shape():
    rate, n = 100.0, 100_000
    grid = default_tau_grid(n, rate)
    assert grid[0] == 2.0 / rate
    assert grid[-1] <= n / (3.0 * rate)
    # 10 points per decade: constant ratio 10^(1/10)
    assert np.allclose(np.diff(np.log10(grid)), 0.1)


def test_out_of_range_taus_dropped_with_warning():
    y = np.random.default_rng(5).normal(size=100)
    with pytest.warns(RuntimeWarning):
        curve = allan_deviation(y, 10.0, taus_s=[0.05, 0.4, 50.0])
    assert curve.taus_s.size == 1


def test_all_taus_invalid_raises():
    y = np.random.default_rng(6).normal(size=100)
    with pytest.warns(RuntimeWarning):
        with pytest.raises(TooShortError):
            allan_deviation(y, 10.0, taus_s=[100.0])


def test_empty_and_short_errors():
    with pytest.raises(EmptyStreamError):
        allan_deviation([], 10.0)
    with pytest.raises(TooShortError):
        allan_deviation([1.0, 2.0, 3.0], 10.0)


# --- white-noise law -------------------------------------------------------

F_HZ = 100.0
SIGMA = 0.01
N_TRUE = SIGMA / math.sqrt(F_HZ)  # 0.001


@pytest.fixture(scope="module")
def white_curve():
    y = np.random.default_rng(0).normal(0, SIGMA, 1_000_000)
    return allan_deviation(y, F_HZ)


def test_white_noise_follows_inverse_sqrt_tau(white_curve):
    # pointwise test range is capped where the estimator's own variance
    # stays well under the 5% band (top-of-grid taus have ~20% spread)
    c = white_curve
    lo, hi = 10.0 / F_HZ, 1_000_000 / (300.0 * F_HZ)
    sel = (c.taus_s >= lo) & (c.taus_s <= hi)
    assert sel.sum() >= 10
    rel = np.abs(c.adev[sel] * np.sqrt(c.taus_s[sel]) - N_TRUE) / N_TRUE
    assert rel.max() < 0.05


def test_noise_density_recovered(white_curve):
    fit = estimate_noise_density(white_curve)
    assert abs(fit.value - N_TRUE) / N_TRUE < 0.05
    assert abs(fit.free_slope - (-0.5)) < 0.05
    assert fit.n_points >= 3


def test_constructed_half_slope_line_exact():
    taus = np.logspace(-2, 2, 41)
    curve = AllanCurve(taus, 2e-3 / np.sqrt(taus), np.full(41, 100))
    fit = estimate_noise_density(curve)
    assert fit.value == pytest.approx(2e-3, rel=1e-12)


def test_random_walk_signal_has_no_white_region():
    y = np.cumsum(np.random.default_rng(7).normal(0, 1e-4, 200_000))
    curve = allan_deviation(y, F_HZ)
    with pytest.raises(NoWhiteNoiseRegionError):
        estimate_noise_density(curve)


# --- random-walk law --------------------------------------------------------

def test_constructed_plus_half_slope_line_exact():
    taus = np.logspace(-1, 3, 41)
    curve = AllanCurve(taus, 5e-4 * np.sqrt(taus / 3.0), np.full(41, 100))
    fit = estimate_random_walk(curve)
    assert fit.value == pytest.approx(5e-4, rel=1e-12)


def test_random_walk_recovered():
    # rate random walk: per-sample steps q at rate f give K = q * sqrt(f)
    q = 1e-5
    steps = np.random.default_rng(8).normal(0, q, 10_000_000)
    curve = allan_deviation(np.cumsum(steps), F_HZ)
    fit = estimate_random_walk(curve)
    k_true = q * math.sqrt(F_HZ)
    assert abs(fit.value - k_true) / k_true < 0.10
    assert abs(fit.free_slope - 0.5) < 0.1


def test_white_noise_has_no_random_walk_region(white_curve):
    with pytest.raises(NoRandomWalkRegionError):
        estimate_random_walk(white_curve)


# --- per-axis aggregation -----------------------------------------------------

def test_characterize_axes_and_aggregate():
    rng = np.random.default_rng(9)
    axes = rng.normal(0, SIGMA, (3, 200_000))
    curves, density, walk = characterize_axes(axes, F_HZ)
    assert len(curves) == 3
    assert all(f is not None for f in density)
    assert all(f is None for f in walk)
    params = aggregate_params(density, walk)
    assert abs(params.noise_density - N_TRUE) / N_TRUE < 0.05
    assert params.random_walk is None
    assert len(params.fit_window_taus["noise_density"]) == 3


def test_imu_log_validation():
    with pytest.raises(ValueError):
        ImuLog(100.0, np.zeros((2, 10)), np.zeros((3, 10)))
    with pytest.raises(ValueError):
        ImuLog(100.0, np.zeros((3, 10)), np.zeros((3, 9)))
    with pytest.raises(ValueError):
        ImuLog(0.0, np.zeros((3, 10)), np.zeros((3, 10)))


# --- I/O -------------------------------------------------------------------

def test_imu_csv_round_trip(tmp_path):
    p = tmp_path / "imu.csv"
    lines = ["t_ns,gx,gy,gz,ax,ay,az"]
    for k in range(10):
        lines.append(f"{k * 10_000_000},{0.1 * k},0.2,0.3,9.8,0.01,0.02")
    p.write_text("\n".join(lines) + "\n")
    log = read_imu_csv(p)
    assert log.rate_hz == pytest.approx(100.0)
    assert log.gyro.shape == (3, 10)
    assert log.gyro[0, 3] == pytest.approx(0.3)
    assert log.accel[0, 0] == pytest.approx(9.8)
    log2 = read_imu_csv(p, rate_hz=250.0)
    assert log2.rate_hz == 250.0


def test_imu_csv_bad_header(tmp_path):
    p = tmp_path / "imu.csv"
    p.write_text("time,gx,gy,gz,ax,ay,az\n0,0,0,0,0,0,0\n")
    with pytest.raises(ParseError):
        read_imu_csv(p)


def test_imu_csv_bad_row(tmp_path):
    p = tmp_path / "imu.csv"
    p.write_text("t_ns,gx,gy,gz,ax,ay,az\n0,0,0,0,0,0\n")
    with pytest.raises(ParseError):
        read_imu_csv(p)


def test_curve_csv_write(tmp_path):
    curve = AllanCurve(np.array([0.1, 1.0]), np.array([1e-3, 3e-4]), np.array([10, 5]))
    p = tmp_path / "curve.csv"
    write_curve_csv(curve, p)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "tau_s,adev"
    assert len(lines) == 3
