"""Clock-sync tests; the simulator doubles as the oracle for fits."""

import numpy as np
import pytest

from rigkit.clocks import (
    ClockDomainKind,
    ClockModel,
    ClockSim,
    ClockSimSpec,
    PairSync,
    ReadoutDelaySpec,
    StampedEvent,
    apply_readout_correction,
    convert,
    convert_array,
    fit_clock_model,
    read_correspondences,
    read_model,
    simulate_clocks,
    stamp,
    sync_quality,
    write_model,
)
from rigkit.errors import (
    BadSpecError,
    DegenerateSpanError,
    EmptyStreamError,
    InsufficientDataError,
    MissingModelError,
    ParseError,
    SkewOutOfRangeError,
    StreamMismatchError,
)

EPOCH = 1_755_000_000_000_000_000  # realistic wall-clock scale, ns


# --- fitting ------------------------------------------------------------------

def test_fit_identity_line():
    pairs = [(k * 10_000_000, k * 10_000_000) for k in range(200)]
    m = fit_clock_model(pairs)
    assert m.offset_ns == 0
    assert m.skew == 1.0
    assert m.rms_residual_ns < 1e-9


def test_fit_two_points_exact():
    m = fit_clock_model([(0, 1000), (2_000_000, 2_001_000)])
    assert m.offset_ns == 1000
    assert m.skew == 1.0
    assert m.rms_residual_ns < 1e-9


def test_fit_insufficient_data():
    with pytest.raises(InsufficientDataError):
        fit_clock_model([(0, 0)])


def test_fit_degenerate_span():
    with pytest.raises(DegenerateSpanError):
        fit_clock_model([(0, 0), (999_999, 999_999)])


def test_fit_skew_out_of_range():
    pairs = [(k * 1_000_000, k * 2_000_000) for k in range(10)]
    with pytest.raises(SkewOutOfRangeError):
        fit_clock_model(pairs)


def test_fit_rejects_non_monotonic_source():
    with pytest.raises(ValueError):
        fit_clock_model([(0, 0), (5, 5), (5, 6), (2_000_000, 2_000_000)])


def test_noise_free_recovery_machine_precision():
    # clean grid: 10 Hz stamps, skew drift of exactly 100 ns per sample
    for n in (11, 1001):
        sim = simulate_clocks(
            ClockSimSpec(true_rate_hz=10.0, skew=1.0 + 1e-6, offset_ns=5_000_000, n=n)
        )
        m = fit_clock_model(sim.pairs())
        assert abs(m.skew - (1.0 + 1e-6)) < 1e-12
        assert abs(m.offset_ns - 5_000_000) < 1
        for s, t in zip(sim.source_ns, sim.target_true_ns):
            assert convert(m, int(s)) == int(t)


def test_noise_free_recovery_at_epoch_scale():
    # anchored arithmetic must survive wall-clock-sized stamps
    sim = simulate_clocks(
        ClockSimSpec(true_rate_hz=10.0, skew=1.0 + 1e-6, offset_ns=5_000_000, n=1001)
    )
    pairs = [(s + EPOCH, t + EPOCH) for s, t in zip(sim.source_ns, sim.target_true_ns)]
    m = fit_clock_model(pairs)
    assert abs(m.skew - (1.0 + 1e-6)) < 1e-12
    for s, t in pairs:
        assert convert(m, s) == t


def test_jittered_recovery_within_stat_bounds():
    sim = simulate_clocks(
        ClockSimSpec(
            true_rate_hz=10.0,
            skew=1.0 + 1e-6,
            offset_ns=5_000_000,
            jitter_ns_sigma=10_000.0,
            n=1000,
            seed=42,
        )
    )
    m = fit_clock_model(sim.pairs())
    assert abs(m.offset_ns - 5_000_000) < 3_000
    assert abs(m.skew - (1.0 + 1e-6)) < 1e-7
    assert 0.8 * 10_000 < m.rms_residual_ns < 1.2 * 10_000


def test_fit_is_least_squares_optimal():
    sim = simulate_clocks(
        ClockSimSpec(true_rate_hz=50.0, skew=1.0 - 2e-6, offset_ns=-777,
                     jitter_ns_sigma=5_000.0, n=40, seed=3)
    )
    m = fit_clock_model(sim.pairs())
    u = sim.source_ns.astype(float) - sim.source_ns[0]
    v = (sim.target_observed_ns - sim.source_ns).astype(float)

    def sse(gamma, delta):
        r = v - (gamma * u + delta)
        return float(r @ r)

    best = sse(m.skew_minus_one, m.bias_ns)
    for dg in np.linspace(-5e-8, 5e-8, 11):
        for dd in np.linspace(-500, 500, 11):
            assert best <= sse(m.skew_minus_one + dg, m.bias_ns + dd) + 1e-9


def test_robust_refit_discards_outlier():
    sim = simulate_clocks(
        ClockSimSpec(true_rate_hz=10.0, skew=1.0, offset_ns=0,
                     jitter_ns_sigma=100.0, n=200, seed=9)
    )
    pairs = sim.pairs()
    s, t = pairs[50]
    pairs[50] = (s, t + 10_000_000)  # 10 ms spike
    plain = fit_clock_model(pairs)
    robust = fit_clock_model(pairs, robust=True)
    assert abs(robust.offset_ns) < abs(plain.offset_ns)
    assert robust.rms_residual_ns < plain.rms_residual_ns


# --- conversion ---------------------------------------------------------------

def test_convert_identity():
    assert convert(ClockModel.identity(), 42) == 42


def test_convert_pure_offset():
    m = ClockModel(offset_ns=100, skew=1.0)
    assert convert(m, 0) == 100


def test_convert_held_out_stamps():
    sim = simulate_clocks(
        ClockSimSpec(true_rate_hz=20.0, skew=1.0 + 3e-6, offset_ns=123_456,
                     jitter_ns_sigma=8_000.0, n=2000, seed=11)
    )
    pairs = sim.pairs()
    m = fit_clock_model(pairs[::2])
    held_src = sim.source_ns[1::2]
    held_true = sim.target_true_ns[1::2]
    err = np.abs(convert_array(m, held_src) - held_true)
    assert err.max() <= 5 * m.rms_residual_ns


def test_convert_strictly_monotone_for_spaced_inputs():
    rng = np.random.default_rng(2)
    for _ in range(5):
        m = ClockModel(
            offset_ns=int(rng.integers(-10**9, 10**9)),
            skew=float(rng.uniform(0.95, 1.05)),
        )
        gaps = rng.integers(2, 1000, size=100_000)
        raws = np.cumsum(gaps)
        out = convert_array(m, raws)
        assert np.all(np.diff(out) > 0)


def test_convert_non_decreasing_adjacent_ns():
    m = ClockModel(offset_ns=5, skew=0.9999995)
    raws = np.arange(10_000_000, 10_100_000)
    out = convert_array(m, raws)
    assert np.all(np.diff(out) >= 0)


def test_convert_scalar_and_array_agree():
    m = ClockModel(offset_ns=987, skew=1.0 + 4e-7, anchor_ns=0)
    raws = np.arange(0, 10**9, 98_765_431)
    arr = convert_array(m, raws)
    for r, a in zip(raws, arr):
        assert convert(m, int(r)) == int(a)


# --- readout correction ---------------------------------------------------------

def test_readout_zero_delay():
    e = StampedEvent(1_000_000, "cam0", 1_000_000)
    out = apply_readout_correction(e, ReadoutDelaySpec("cam0", 0))
    assert out.corrected_stamp_ns == 1_000_000


def test_readout_subtracts_delay():
    e = StampedEvent(1_000_000, "cam0", 1_000_000)
    out = apply_readout_correction(e, ReadoutDelaySpec("cam0", 250_000))
    assert out.corrected_stamp_ns == 750_000
    assert out.raw_stamp_ns == 1_000_000


def test_readout_stream_mismatch():
    e = StampedEvent(1_000_000, "cam0", 1_000_000)
    with pytest.raises(StreamMismatchError):
        apply_readout_correction(e, ReadoutDelaySpec("cam1", 0))


def test_readout_delay_range():
    with pytest.raises(ValueError):
        ReadoutDelaySpec("cam0", -1)
    with pytest.raises(ValueError):
        ReadoutDelaySpec("cam0", 1_000_000_000)


def test_readout_correction_aligns_simulated_capture():
    # same true events, each stream arrives late by its own readout delay
    rng = np.random.default_rng(4)
    true_ns = np.arange(0, 10**9, 33_333_333)
    delays = {"cam0": 150_000, "cam1": 410_000}
    jitter = 2_000
    streams = {}
    for name, d in delays.items():
        noise = rng.integers(-jitter, jitter + 1, size=true_ns.size)
        streams[name] = true_ns + d + noise
    before = int(np.abs(streams["cam0"] - streams["cam1"]).max())
    corrected = {
        name: np.array([
            apply_readout_correction(
                StampedEvent(int(s), name), ReadoutDelaySpec(name, delays[name])
            ).corrected_stamp_ns
            for s in stamps
        ])
        for name, stamps in streams.items()
    }
    after = int(np.abs(corrected["cam0"] - corrected["cam1"]).max())
    assert before > 200_000
    assert after <= 2 * jitter


# --- stamping policies -----------------------------------------------------------

def test_stamp_system_passthrough():
    e = stamp(ClockDomainKind.SYSTEM, arrival_ns=123, stream_id="imu")
    assert e.corrected_stamp_ns == 123


def test_stamp_tsc_scales_counter():
    e = stamp(ClockDomainKind.TSC, counter=31_250_000, counter_hz=31.25e6)
    assert e.corrected_stamp_ns == 1_000_000_000


def test_stamp_tsc_rounds_half_up_exact_integers():
    # 3 counts at 2 Hz -> 1.5 s
    e = stamp(ClockDomainKind.TSC, counter=3, counter_hz=2)
    assert e.corrected_stamp_ns == 1_500_000_000


def test_stamp_ptp_requires_model():
    with pytest.raises(MissingModelError):
        stamp(ClockDomainKind.PTP, arrival_ns=0)


def test_stamp_ptp_aligns_two_sensors():
    # two sensors observing the same instants through different clocks
    true_ns = np.arange(0, 5 * 10**9, 50_000_000)
    rng = np.random.default_rng(8)
    models_true = {
        "a": (1.0 + 2e-6, 4_000_000),
        "b": (1.0 - 1e-6, -2_500_000),
    }
    fitted = {}
    raws = {}
    for name, (skew, offset) in models_true.items():
        smo = skew - 1.0
        raw = true_ns + np.rint(smo * true_ns + offset).astype(np.int64)
        raw = raw + rng.integers(-3000, 3001, true_ns.size)
        raws[name] = raw
        # correspondences: (sensor raw stamp, shared reference stamp)
        fitted[name] = fit_clock_model(list(zip(raw.tolist(), true_ns.tolist())))
    stamps = {
        name: np.array([
            stamp(ClockDomainKind.PTP, arrival_ns=int(r), model=fitted[name]).corrected_stamp_ns
            for r in raws[name]
        ])
        for name in raws
    }
    worst = int(np.abs(stamps["a"] - stamps["b"]).max())
    floor = 5 * (fitted["a"].rms_residual_ns + fitted["b"].rms_residual_ns)
    assert worst <= floor


# --- simulator ----------------------------------------------------------------

def test_simulator_zero_jitter_observations_equal_truth():
    sim = simulate_clocks(ClockSimSpec(true_rate_hz=100.0, n=50))
    assert np.array_equal(sim.target_true_ns, sim.target_observed_ns)
    assert np.array_equal(sim.source_ns, sim.target_true_ns)


def test_simulator_deterministic():
    spec = ClockSimSpec(true_rate_hz=100.0, skew=1.0 + 5e-7, offset_ns=99,
                        jitter_ns_sigma=500.0, n=100, seed=1234)
    a, b = simulate_clocks(spec), simulate_clocks(spec)
    assert np.array_equal(a.target_observed_ns, b.target_observed_ns)


def test_simulator_jitter_statistics():
    spec = ClockSimSpec(true_rate_hz=100.0, jitter_ns_sigma=5_000.0, n=10_000, seed=5)
    sim = simulate_clocks(spec)
    sample_std = float(np.std(sim.target_observed_ns - sim.target_true_ns))
    assert abs(sample_std - 5_000.0) / 5_000.0 < 0.10


def test_simulator_bad_specs():
    with pytest.raises(BadSpecError):
        ClockSimSpec(true_rate_hz=100.0, n=1)
    with pytest.raises(BadSpecError):
        ClockSimSpec(true_rate_hz=100.0, jitter_ns_sigma=-1.0)
    with pytest.raises(BadSpecError):
        ClockSimSpec(true_rate_hz=0.0)


# --- sync quality ----------------------------------------------------------------

def test_sync_identical_streams():
    s = list(range(0, 10**9, 10_000_000))
    rep = sync_quality({"a": s, "b": s})
    assert rep.pairs[0].max_offset_ns == 0
    assert rep.pairs[0].p95_offset_ns == 0
    assert not rep.flagged


def test_sync_constant_offset():
    s = np.arange(0, 10**9, 10_000_000)
    rep = sync_quality({"a": s, "b": s + 200_000})
    assert rep.pairs[0].max_offset_ns == 200_000
    assert not rep.flagged


def test_sync_flags_above_millisecond():
    s = np.arange(0, 10**9, 10_000_000)
    rep = sync_quality({"a": s, "b": s + 2_000_000})
    assert rep.flagged
    assert rep.worst_pair.max_offset_ns == 2_000_000


def test_sync_requires_two_streams():
    with pytest.raises(InsufficientDataError):
        sync_quality({"a": [0, 1]})


def test_sync_empty_stream():
    with pytest.raises(EmptyStreamError):
        sync_quality({"a": [0, 1], "b": []})


def test_sync_matches_brute_force_nearest_neighbor():
    rng = np.random.default_rng(6)
    t30 = np.arange(0, 2 * 10**9, 33_333_333)
    t30 = t30 + rng.integers(-50_000, 50_001, t30.size)
    t100 = np.arange(0, 2 * 10**9, 10_000_000)
    t100 = t100 + rng.integers(-50_000, 50_001, t100.size)
    t30.sort(); t100.sort()
    rep = sync_quality({"cam": t30, "imu": t100})
    # brute force from the sparser stream
    offsets = np.array([np.abs(t100 - a).min() for a in t30])
    pair = rep.pairs[0]
    assert pair.stream_a == "cam"
    assert pair.max_offset_ns == int(offsets.max())
    assert pair.p95_offset_ns == int(round(float(np.percentile(offsets, 95))))


def test_sync_window_filters_far_events():
    rep = sync_quality({"a": [0, 1_000, 50_000_000], "b": [0, 1_100]}, window_ns=10_000)
    assert rep.pairs[0].max_offset_ns <= 10_000


# --- correspondence CSV ------------------------------------------------------------

def test_read_correspondences_round_trip(tmp_path):
    p = tmp_path / "pairs.csv"
    p.write_text("source_ns,target_ns\n0,100\n1000000,1000105\n")
    assert read_correspondences(p) == [(0, 100), (1_000_000, 1_000_105)]


def test_read_correspondences_bad_header(tmp_path):
    p = tmp_path / "pairs.csv"
    p.write_text("src,tgt\n0,100\n")
    with pytest.raises(ParseError):
        read_correspondences(p)


def test_read_correspondences_bad_value(tmp_path):
    p = tmp_path / "pairs.csv"
    p.write_text("source_ns,target_ns\n0,abc\n")
    with pytest.raises(ParseError):
        read_correspondences(p)


# --- model persistence ---------------------------------------------------


def test_model_write_read_round_trip(tmp_path):
    pairs = [(EPOCH + k * 100_000_000, EPOCH + k * 100_000_000 + 5_000_000 + k * 100)
             for k in range(500)]
    model = fit_clock_model(pairs)
    path = tmp_path / "model.json"
    write_model(model, path)
    back = read_model(path)
    assert back == model
    # reloaded model converts bit-identically
    probes = [EPOCH - 10**9, EPOCH, EPOCH + 12_345_678_901]
    assert [convert(back, p) for p in probes] == [convert(model, p) for p in probes]


def test_model_read_rejects_bad_files(tmp_path):
    path = tmp_path / "model.json"
    path.write_text("{")
    with pytest.raises(ParseError):
        read_model(path)
    path.write_text('{"offset_ns": 0}')
    with pytest.raises(ParseError, match="keys"):
        read_model(path)
    path.write_text("[1, 2]")
    with pytest.raises(ParseError, match="object"):
        read_model(path)
