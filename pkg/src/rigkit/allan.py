"""Overlapping Allan deviation and IMU noise-parameter extraction.

The two parameters extracted are the ones an IMU calibration needs:
noise density N (white noise, -1/2 slope region, read at tau = 1 s) and
rate random walk K (+1/2 slope region, read at tau = 3 s). Read-off
conventions follow the usual Allan-plot practice.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyStreamError,
    NoRandomWalkRegionError,
    NoWhiteNoiseRegionError,
    ParseError,
    TooShortError,
)

# longest contiguous run of local log-log slopes within +-0.1 of the target
SLOPE_BAND = 0.1
MIN_REGION_POINTS = 3


@dataclass(frozen=True, eq=False)
class ImuLog:
    """Static IMU recording; gyro/accel are (3, n) arrays in SI units."""

    rate_hz: float
    gyro: np.ndarray
    accel: np.ndarray
    stamps_ns: np.ndarray = None

    def __post_init__(self):
        gyro = np.asarray(self.gyro, dtype=float)
        accel = np.asarray(self.accel, dtype=float)
        if gyro.shape[0] != 3 or accel.shape[0] != 3:
            raise ValueError("gyro and accel must be (3, n) arrays")
        if gyro.shape[1] != accel.shape[1]:
            raise ValueError("gyro and accel must have the same sample count")
        if gyro.shape[1] < 2:
            raise ValueError("need at least 2 samples")
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be > 0")
        object.__setattr__(self, "gyro", gyro)
        object.__setattr__(self, "accel", accel)


@dataclass(frozen=True, eq=False)
class AllanCurve:
    taus_s: np.ndarray
    adev: np.ndarray
    n_clusters: np.ndarray


@dataclass(frozen=True)
class NoiseFit:
    value: float
    tau_min_s: float
    tau_max_s: float
    n_points: int
    free_slope: float  # unconstrained OLS slope over the region, diagnostic


@dataclass(frozen=True)
class ImuNoiseParams:
    noise_density: float
    random_walk: float
    fit_window_taus: dict


def default_tau_grid(n_samples: int, rate_hz: float) -> np.ndarray:
    """Log-spaced taus, 10 points per decade, from 2/rate to n/(3 rate)."""
    tau_min = 2.0 / rate_hz
    tau_max = n_samples / (3.0 * rate_hz)
    if tau_max < tau_min:
        raise TooShortError(
            f"{n_samples} samples at {rate_hz} Hz support no valid tau"
        )
    k_max = int(math.floor(10.0 * math.log10(tau_max / tau_min)))
    return tau_min * 10.0 ** (np.arange(k_max + 1) / 10.0)


def allan_deviation(samples, rate_hz: float, taus_s=None) -> AllanCurve:
    """Overlapping Allan deviation of a uniformly sampled signal.

    sigma^2(tau) = 1/(2 (N - 2m)) * sum_k (ybar_{k+m} - ybar_k)^2 with
    m = tau * rate and ybar_k the mean of the m samples starting at k.
    Taus outside [2/rate, n/(3 rate)] are dropped with a warning; the
    reported taus are the realized m/rate values.
    """
    y = np.asarray(samples, dtype=float).ravel()
    n = y.size
    if n == 0:
        raise EmptyStreamError("no samples")
    if rate_hz <= 0:
        raise ValueError("rate_hz must be > 0")
    if n < 6:
        raise TooShortError(f"need >= 6 samples, got {n}")
    if taus_s is None:
        taus_s = default_tau_grid(n, rate_hz)
    taus_s = np.asarray(taus_s, dtype=float)

    ms = np.unique(np.rint(taus_s * rate_hz).astype(int))
    valid = (ms >= 2) & (ms <= n // 3)
    if not valid.all():
        warnings.warn(
            f"dropping {int((~valid).sum())} taus outside the valid range",
            RuntimeWarning,
            stacklevel=2,
        )
    ms = ms[valid]
    if ms.size == 0:
        raise TooShortError("no taus in the valid range")

    # cumulative sum with a leading zero: m * (ybar_{k+m} - ybar_k) is the
    # second difference s[k+2m] - 2 s[k+m] + s[k]; shifting by y[0] leaves
    # the statistic unchanged and keeps constant signals exactly at zero
    s = np.concatenate(([0.0], np.cumsum(y - y[0])))
    taus_out = np.empty(ms.size)
    adev = np.empty(ms.size)
    clusters = np.empty(ms.size, dtype=int)
    for i, m in enumerate(ms):
        d = s[2 * m : n] - 2.0 * s[m : n - m] + s[0 : n - 2 * m]
        var = float(d @ d) / (2.0 * m * m * (n - 2 * m))
        taus_out[i] = m / rate_hz
        adev[i] = math.sqrt(var)
        clusters[i] = n - 2 * m
    return AllanCurve(taus_s=taus_out, adev=adev, n_clusters=clusters)


def _local_slopes(curve: AllanCurve) -> np.ndarray:
    lt = np.log10(curve.taus_s)
    la = np.log10(curve.adev)
    slopes = np.gradient(la, lt)
    return slopes


def _longest_region(mask: np.ndarray):
    best = (0, 0)  # (length, start)
    start = None
    for i, ok in enumerate(list(mask) + [False]):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if i - start > best[0]:
                best = (i - start, start)
            start = None
    return best  # length, start


def _fit_region(curve: AllanCurve, target_slope: float, ref_tau: float):
    if np.any(curve.adev <= 0):
        keep = curve.adev > 0
        curve = AllanCurve(curve.taus_s[keep], curve.adev[keep], curve.n_clusters[keep])
    if curve.taus_s.size < MIN_REGION_POINTS:
        return None
    slopes = _local_slopes(curve)
    mask = np.abs(slopes - target_slope) <= SLOPE_BAND
    length, start = _longest_region(mask)
    if length < MIN_REGION_POINTS:
        return None
    taus = curve.taus_s[start : start + length]
    adev = curve.adev[start : start + length]
    # one-parameter OLS with the slope pinned to the target; the free-slope
    # fit is kept as a diagnostic
    log_value = float(np.mean(np.log10(adev) - target_slope * np.log10(taus / ref_tau)))
    free_slope = float(np.polyfit(np.log10(taus), np.log10(adev), 1)[0])
    return NoiseFit(
        value=10.0 ** log_value,
        tau_min_s=float(taus[0]),
        tau_max_s=float(taus[-1]),
        n_points=int(length),
        free_slope=free_slope,
    )


def estimate_noise_density(curve: AllanCurve) -> NoiseFit:
    """White-noise coefficient N: -1/2 slope region, read at tau = 1 s."""
    fit = _fit_region(curve, target_slope=-0.5, ref_tau=1.0)
    if fit is None:
        raise NoWhiteNoiseRegionError(
            "no contiguous region with local slope in [-0.6, -0.4]"
        )
    return fit


def estimate_random_walk(curve: AllanCurve) -> NoiseFit:
    """Rate-random-walk coefficient K: +1/2 slope region, read at tau = 3 s."""
    fit = _fit_region(curve, target_slope=0.5, ref_tau=3.0)
    if fit is None:
        raise NoRandomWalkRegionError(
            "no contiguous region with local slope in [0.4, 0.6]"
        )
    return fit


def characterize_axes(axes: np.ndarray, rate_hz: float, taus_s=None):
    """Per-axis Allan curves and noise fits for a (3, n) signal block.

    Returns (curves, density_fits, walk_fits); fits that fail region
    selection are None for that axis.
    """
    curves = []
    density = []
    walk = []
    for axis in axes:
        c = allan_deviation(axis, rate_hz, taus_s)
        curves.append(c)
        try:
            density.append(estimate_noise_density(c))
        except NoWhiteNoiseRegionError:
            density.append(None)
        try:
            walk.append(estimate_random_walk(c))
        except NoRandomWalkRegionError:
            walk.append(None)
    return curves, density, walk


def aggregate_params(density_fits, walk_fits) -> ImuNoiseParams:
    """Mean over axes with successful fits; None where every axis failed."""
    dens = [f.value for f in density_fits if f is not None]
    walks = [f.value for f in walk_fits if f is not None]
    window = {
        "noise_density": [
            None if f is None else [f.tau_min_s, f.tau_max_s] for f in density_fits
        ],
        "random_walk": [
            None if f is None else [f.tau_min_s, f.tau_max_s] for f in walk_fits
        ],
    }
    return ImuNoiseParams(
        noise_density=float(np.mean(dens)) if dens else None,
        random_walk=float(np.mean(walks)) if walks else None,
        fit_window_taus=window,
    )


# --- I/O ----------------------------------------------------------------------

IMU_CSV_HEADER = ["t_ns", "gx", "gy", "gz", "ax", "ay", "az"]


def read_imu_csv(path, rate_hz: float = None) -> ImuLog:
    """Load `t_ns,gx,gy,gz,ax,ay,az`; rate inferred from stamps if not given."""
    stamps = []
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != IMU_CSV_HEADER:
            raise ParseError(f"{path}: expected header {','.join(IMU_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 7:
                raise ParseError(f"{path}:{lineno}: expected 7 columns")
            try:
                stamps.append(int(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad numeric value") from None
    if len(rows) < 2:
        raise TooShortError(f"{path}: need >= 2 samples")
    vals = np.array(rows, dtype=float).T
    stamps = np.array(stamps, dtype=np.int64)
    if rate_hz is None:
        dt = np.median(np.diff(stamps))
        if dt <= 0:
            raise ParseError(f"{path}: stamps not increasing, cannot infer rate")
        rate_hz = 1e9 / float(dt)
    return ImuLog(
        rate_hz=rate_hz, gyro=vals[0:3], accel=vals[3:6], stamps_ns=stamps
    )


def write_curve_csv(curve: AllanCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau_s", "adev"])
        for t, a in zip(curve.taus_s, curve.adev):
            writer.writerow([f"{t:.9g}", f"{a:.12g}"])
