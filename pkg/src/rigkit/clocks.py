"""Clock-domain synchronization: affine model fitting, timestamp
conversion, readout-delay correction, stamping policies, and inter-stream
sync quality, plus a synthetic clock simulator used as the test oracle.

All stamps are integer nanoseconds end to end. The affine model
target = skew * source + offset is kept in an anchored form

    convert(raw) = raw + round(smo * (raw - anchor) + bias)

with smo = skew - 1 taken directly from the regression, because evaluating
skew * raw at epoch-scale stamps in float64 would cost hundreds of ns.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadSpecError,
    DegenerateSpanError,
    EmptyStreamError,
    InsufficientDataError,
    MissingModelError,
    SkewOutOfRangeError,
    StreamMismatchError,
)

SKEW_RANGE = (0.9, 1.1)
MIN_SPAN_NS = 1_000_000  # 1 ms
SYNC_FLAG_NS = 1_000_000  # worst pair above this is flagged


class ClockDomainKind(enum.Enum):
    SYSTEM = "system"
    TSC = "tsc"
    PTP = "ptp"


@dataclass(frozen=True)
class ClockModel:
    """Affine clock map; offset_ns/skew are the reported parameters,
    the anchored triple is what convert() actually evaluates."""

    offset_ns: int
    skew: float
    source: ClockDomainKind = ClockDomainKind.TSC
    target: ClockDomainKind = ClockDomainKind.PTP
    rms_residual_ns: float = 0.0
    anchor_ns: int = 0
    skew_minus_one: float = None
    bias_ns: float = None

    def __post_init__(self):
        if self.skew_minus_one is None:
            object.__setattr__(self, "skew_minus_one", self.skew - 1.0)
        if self.bias_ns is None:
            object.__setattr__(
                self, "bias_ns", self.offset_ns + self.skew_minus_one * self.anchor_ns
            )
        if not (SKEW_RANGE[0] < self.skew < SKEW_RANGE[1]):
            raise SkewOutOfRangeError(f"skew {self.skew} outside {SKEW_RANGE}")

    @classmethod
    def identity(cls, source=ClockDomainKind.TSC, target=ClockDomainKind.PTP):
        return cls(offset_ns=0, skew=1.0, source=source, target=target)


@dataclass(frozen=True)
class StampedEvent:
    raw_stamp_ns: int
    stream_id: str
    corrected_stamp_ns: int = None


@dataclass(frozen=True)
class ReadoutDelaySpec:
    stream_id: str
    delay_ns: int

    def __post_init__(self):
        if not (0 <= self.delay_ns < 1_000_000_000):
            raise ValueError("delay_ns must be in [0, 1 s)")


def fit_clock_model(
    pairs,
    source: ClockDomainKind = ClockDomainKind.TSC,
    target: ClockDomainKind = ClockDomainKind.PTP,
    robust: bool = False,
) -> ClockModel:
    """Least-squares affine fit of target = skew * source + offset.

    The regression runs on (source - source[0], target - source), so the
    slope estimate is skew - 1 with no cancellation and the intercept
    stays at discrepancy scale regardless of epoch.
    """
    pairs = [(int(s), int(t)) for s, t in pairs]
    if len(pairs) < 2:
        raise InsufficientDataError(f"need >= 2 pairs, got {len(pairs)}")
    src = np.array([p[0] for p in pairs], dtype=np.int64)
    tgt = np.array([p[1] for p in pairs], dtype=np.int64)
    if np.any(np.diff(src) <= 0):
        raise ValueError("source stamps must be strictly increasing")
    span = int(src[-1] - src[0])
    if span < MIN_SPAN_NS:
        raise DegenerateSpanError(f"source span {span} ns < {MIN_SPAN_NS} ns")

    anchor = int(src[0])
    u = (src - anchor).astype(np.float64)
    v = (tgt - src).astype(np.float64)

    gamma, delta, rms = _ols(u, v)
    if robust and rms > 0:
        res = v - (gamma * u + delta)
        keep = np.abs(res) <= 3.0 * rms
        if keep.sum() >= 2 and not keep.all():
            u2, v2 = u[keep], v[keep]
            if u2[-1] - u2[0] >= MIN_SPAN_NS:
                gamma, delta, rms = _ols(u2, v2)

    skew = 1.0 + gamma
    if not (SKEW_RANGE[0] < skew < SKEW_RANGE[1]):
        raise SkewOutOfRangeError(f"fitted skew {skew} outside {SKEW_RANGE}")
    offset_ns = round(delta - gamma * anchor)
    return ClockModel(
        offset_ns=offset_ns,
        skew=skew,
        source=source,
        target=target,
        rms_residual_ns=float(rms),
        anchor_ns=anchor,
        skew_minus_one=gamma,
        bias_ns=float(delta),
    )


def _ols(u, v):
    um, vm = u.mean(), v.mean()
    du, dv = u - um, v - vm
    denom = float(du @ du)
    gamma = float(du @ dv) / denom if denom > 0 else 0.0
    delta = float(vm - gamma * um)
    res = v - (gamma * u + delta)
    return gamma, delta, float(np.sqrt(np.mean(res * res)))


def convert(m: ClockModel, raw_ns: int) -> int:
    """Map a source-domain stamp into the target domain (integer ns)."""
    return int(raw_ns) + round(m.skew_minus_one * (int(raw_ns) - m.anchor_ns) + m.bias_ns)


def convert_array(m: ClockModel, raw_ns) -> np.ndarray:
    raw = np.asarray(raw_ns, dtype=np.int64)
    corr = np.rint(m.skew_minus_one * (raw - m.anchor_ns).astype(np.float64) + m.bias_ns)
    return raw + corr.astype(np.int64)


def apply_readout_correction(e: StampedEvent, spec: ReadoutDelaySpec) -> StampedEvent:
    """Shift the event stamp earlier by the per-stream readout delay."""
    if e.stream_id != spec.stream_id:
        raise StreamMismatchError(
            f"event stream {e.stream_id!r} != spec stream {spec.stream_id!r}"
        )
    base = e.corrected_stamp_ns if e.corrected_stamp_ns is not None else e.raw_stamp_ns
    return StampedEvent(
        raw_stamp_ns=e.raw_stamp_ns,
        stream_id=e.stream_id,
        corrected_stamp_ns=base - spec.delay_ns,
    )


def stamp(
    policy: ClockDomainKind,
    *,
    arrival_ns: int = None,
    counter: int = None,
    counter_hz: float = None,
    model: ClockModel = None,
    stream_id: str = "",
) -> StampedEvent:
    """Produce a stamped event under one of the three timestamping modes."""
    if policy is ClockDomainKind.SYSTEM:
        if arrival_ns is None:
            raise BadSpecError("SYSTEM policy needs arrival_ns")
        return StampedEvent(int(arrival_ns), stream_id, int(arrival_ns))
    if policy is ClockDomainKind.TSC:
        if counter is None or counter_hz is None or counter_hz <= 0:
            raise BadSpecError("TSC policy needs counter and counter_hz > 0")
        if float(counter_hz).is_integer():
            hz = int(counter_hz)
            ns, rem = divmod(int(counter) * 1_000_000_000, hz)
            ns += 1 if 2 * rem >= hz else 0
        else:
            ns = round(int(counter) * 1e9 / counter_hz)
        return StampedEvent(int(counter), stream_id, int(ns))
    if policy is ClockDomainKind.PTP:
        if arrival_ns is None:
            raise BadSpecError("PTP policy needs arrival_ns (raw source stamp)")
        if model is None:
            raise MissingModelError("PTP policy needs a fitted ClockModel")
        return StampedEvent(int(arrival_ns), stream_id, convert(model, arrival_ns))
    raise BadSpecError(f"unknown policy {policy!r}")


# --- simulator (test oracle) ------------------------------------------------

@dataclass(frozen=True)
class ClockSimSpec:
    true_rate_hz: float
    skew: float = 1.0
    offset_ns: int = 0
    jitter_ns_sigma: float = 0.0
    n: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise BadSpecError("n must be >= 2")
        if self.jitter_ns_sigma < 0:
            raise BadSpecError("jitter must be >= 0")
        if self.true_rate_hz <= 0:
            raise BadSpecError("rate must be > 0")


@dataclass(frozen=True)
class ClockSim:
    spec: ClockSimSpec
    source_ns: np.ndarray
    target_true_ns: np.ndarray
    target_observed_ns: np.ndarray

    def pairs(self):
        return list(zip(self.source_ns.tolist(), self.target_observed_ns.tolist()))


def simulate_clocks(spec: ClockSimSpec) -> ClockSim:
    """Deterministic synthetic correspondences plus noise-free truth.

    Source stamps start at 0 on an ideal grid; true targets follow the
    affine law exactly (rounded to integer ns); observations add Gaussian
    jitter drawn from a seeded generator.
    """
    k = np.arange(spec.n, dtype=np.int64)
    source = np.rint(k * (1e9 / spec.true_rate_hz)).astype(np.int64)
    smo = spec.skew - 1.0
    true_target = source + np.rint(
        smo * source.astype(np.float64) + spec.offset_ns
    ).astype(np.int64)
    if spec.jitter_ns_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        noise = np.rint(rng.normal(0.0, spec.jitter_ns_sigma, spec.n)).astype(np.int64)
    else:
        noise = np.zeros(spec.n, dtype=np.int64)
    return ClockSim(spec, source, true_target, true_target + noise)


# --- sync quality -------------------------------------------------------------

@dataclass(frozen=True)
class PairSync:
    stream_a: str  # sparser stream: offsets measured from its events
    stream_b: str
    max_offset_ns: int
    p95_offset_ns: int
    n_events: int


@dataclass(frozen=True)
class SyncReport:
    pairs: tuple
    worst_pair: PairSync
    flagged: bool


def sync_quality(streams: dict, window_ns: int = None) -> SyncReport:
    """Nearest-event stamp offsets for every stream pair.

    Offsets are measured from each event of the sparser stream to its
    nearest event in the denser one (ties broken toward the earlier
    event); a pair whose worst offset exceeds 1 ms is flagged.
    """
    if len(streams) < 2:
        raise InsufficientDataError("need >= 2 streams")
    arrs = {}
    for name, stamps in streams.items():
        a = np.asarray(stamps, dtype=np.int64)
        if a.size == 0:
            raise EmptyStreamError(f"stream {name!r} is empty")
        if np.any(np.diff(a) < 0):
            raise ValueError(f"stream {name!r} is not monotonic")
        arrs[name] = a

    names = sorted(arrs)
    results = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a_name, b_name = names[i], names[j]
            if len(arrs[b_name]) < len(arrs[a_name]) or (
                len(arrs[b_name]) == len(arrs[a_name]) and b_name < a_name
            ):
                a_name, b_name = b_name, a_name
            offsets = _nearest_offsets(arrs[a_name], arrs[b_name])
            if window_ns is not None:
                offsets = offsets[offsets <= window_ns]
                if offsets.size == 0:
                    raise EmptyStreamError(
                        f"no events of {a_name!r} within window of {b_name!r}"
                    )
            results.append(
                PairSync(
                    stream_a=a_name,
                    stream_b=b_name,
                    max_offset_ns=int(offsets.max()),
                    p95_offset_ns=int(round(float(np.percentile(offsets, 95)))),
                    n_events=int(offsets.size),
                )
            )
    worst = max(results, key=lambda p: p.max_offset_ns)
    return SyncReport(
        pairs=tuple(results),
        worst_pair=worst,
        flagged=worst.max_offset_ns > SYNC_FLAG_NS,
    )


def _nearest_offsets(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a_i - nearest(b)| for each event of a; ties pick the earlier b."""
    pos = np.searchsorted(b, a)
    left = np.clip(pos - 1, 0, len(b) - 1)
    right = np.clip(pos, 0, len(b) - 1)
    d_left = np.abs(a - b[left])
    d_right = np.abs(a - b[right])
    # <= keeps the earlier event on ties; offsets are equal either way
    return np.where(d_left <= d_right, d_left, d_right)


def read_correspondences(path) -> list:
    """CSV with header source_ns,target_ns -> list of int pairs."""
    from .errors import ParseError

    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["source_ns", "target_ns"]:
            raise ParseError(f"{path}: expected header 'source_ns,target_ns'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 columns")
            try:
                out.append((int(row[0]), int(row[1])))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: stamps must be integers") from None
    return out


_MODEL_KEYS = {
    "offset_ns", "skew", "source", "target",
    "rms_residual_ns", "anchor_ns", "skew_minus_one", "bias_ns",
}


def write_model(m: ClockModel, path) -> None:
    """Persist a fitted model. The anchored triple is stored verbatim so
    a reloaded model converts bit-identically."""
    import json

    doc = {
        "anchor_ns": m.anchor_ns,
        "bias_ns": m.bias_ns,
        "offset_ns": m.offset_ns,
        "rms_residual_ns": m.rms_residual_ns,
        "skew": m.skew,
        "skew_minus_one": m.skew_minus_one,
        "source": m.source.value,
        "target": m.target.value,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_model(path) -> ClockModel:
    import json

    from .errors import ParseError

    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: bad JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    if set(doc) != _MODEL_KEYS:
        raise ParseError(f"{path}: expected exactly keys {sorted(_MODEL_KEYS)}")
    try:
        return ClockModel(
            offset_ns=int(doc["offset_ns"]),
            skew=float(doc["skew"]),
            source=ClockDomainKind(doc["source"]),
            target=ClockDomainKind(doc["target"]),
            rms_residual_ns=float(doc["rms_residual_ns"]),
            anchor_ns=int(doc["anchor_ns"]),
            skew_minus_one=float(doc["skew_minus_one"]),
            bias_ns=float(doc["bias_ns"]),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None
