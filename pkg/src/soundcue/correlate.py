"""Correlation and peak-picking primitives.

The sliding dot products behind both correlation flavours run through
zero-padded real FFTs, so matching a dictionary of patterns against a
multi-second recording finishes in well under a second. The test suite
keeps an O(n*m) direct evaluation of the same sums as the reference
oracle for the FFT path.

Lag convention: values[tau] is the score for the pattern *starting* at
sample tau of the sequence, with the sequence treated as zero beyond its
end. Raw correlation approximates the integral of s(u+tau)*p(u) du, so
sums are scaled by the sample period; the normalized flavour is the
windowed cosine similarity, which is what thresholds apply to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioClip
from .errors import DetectionError

EPS_ENERGY = 1e-12


@dataclass(frozen=True)
class CorrelationTrace:
    """Correlation values indexed by lag sample, one per sequence sample."""

    values: np.ndarray
    sample_rate_hz: int
    normalized: bool

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"trace values must be one-dimensional, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.values.size

    def lag_times_s(self) -> np.ndarray:
        return np.arange(self.values.size) / self.sample_rate_hz


def _check_pair(s: AudioClip, p: AudioClip) -> None:
    if s.sample_rate_hz != p.sample_rate_hz:
        raise DetectionError(
            f"sample rates differ: sequence {s.sample_rate_hz} Hz vs pattern {p.sample_rate_hz} Hz"
        )
    if len(p) == 0:
        raise DetectionError("pattern is empty")
    if len(p) > len(s):
        raise DetectionError(f"pattern ({len(p)} samples) is longer than the sequence ({len(s)})")


def _sliding_dot(s: np.ndarray, p: np.ndarray) -> np.ndarray:
    """sum_u s[tau+u] * p[u] for tau = 0..len(s)-1, s zero-padded at the tail."""
    n, m = s.size, p.size
    nfft = 1 << (n + m - 1).bit_length()
    spec = np.fft.rfft(s, nfft) * np.conj(np.fft.rfft(p, nfft))
    return np.fft.irfft(spec, nfft)[:n]


def raw_cross_correlate(s: AudioClip, p: AudioClip) -> CorrelationTrace:
    """Unnormalized cross-correlation, the discretized overlap integral."""
    _check_pair(s, p)
    values = _sliding_dot(s.samples, p.samples) / s.sample_rate_hz
    return CorrelationTrace(values, s.sample_rate_hz, normalized=False)


def normalized_cross_correlate(s: AudioClip, p: AudioClip) -> CorrelationTrace:
    """Windowed normalized cross-correlation, bounded in [-1, 1].

    Each lag divides the sliding dot product by the geometric mean of the
    pattern energy and the sequence energy inside the aligned window, so
    the score is invariant to how loud the instance was voiced.
    """
    _check_pair(s, p)
    pattern_energy = float(np.dot(p.samples, p.samples))
    if pattern_energy <= 0.0:
        raise DetectionError("pattern has zero energy")
    n, m = len(s), len(p)
    num = _sliding_dot(s.samples, p.samples)
    csum = np.concatenate(([0.0], np.cumsum(s.samples * s.samples)))
    ends = np.minimum(np.arange(n) + m, n)
    window_energy = csum[ends] - csum[:n]
    denom = np.sqrt(np.maximum(window_energy, EPS_ENERGY) * pattern_energy)
    values = np.clip(num / denom, -1.0, 1.0)
    return CorrelationTrace(values, s.sample_rate_hz, normalized=True)


def energy(x: AudioClip) -> float:
    """Discretized integral of the squared signal (dimensionless * seconds)."""
    return float(np.dot(x.samples, x.samples) / x.sample_rate_hz)


def moving_average(trace: CorrelationTrace, window_s: float) -> CorrelationTrace:
    """Centered boxcar mean; partial windows at the edges average what exists."""
    if window_s <= 0:
        raise ValueError(f"window_s must be positive, got {window_s}")
    n = len(trace)
    w = int(round(window_s * trace.sample_rate_hz))
    if w <= 1 or n == 0:
        return trace
    left = (w - 1) // 2
    idx = np.arange(n)
    starts = np.maximum(idx - left, 0)
    ends = np.minimum(idx - left + w, n)
    csum = np.concatenate(([0.0], np.cumsum(trace.values)))
    out = (csum[ends] - csum[starts]) / (ends - starts)
    return CorrelationTrace(out, trace.sample_rate_hz, trace.normalized)


def find_local_maxima(trace: CorrelationTrace, threshold: float) -> list[tuple[int, float]]:
    """Lags of strict local maxima above `threshold`, in increasing order.

    A plateau counts once and reports its center sample (floor of the
    midpoint for even plateaus). Runs touching either end of the trace are
    never maxima, so a monotone trace yields nothing.
    """
    v = trace.values
    if v.size < 3:
        return []
    # run-length encode so plateaus are handled exactly
    starts = np.concatenate(([0], np.flatnonzero(np.diff(v)) + 1))
    run_values = v[starts]
    if run_values.size < 3:
        return []
    ends = np.concatenate((starts[1:], [v.size]))  # exclusive
    interior = run_values[1:-1]
    keep = (interior > run_values[:-2]) & (interior > run_values[2:]) & (interior > threshold)
    picked = np.flatnonzero(keep) + 1
    centers = (starts[picked] + ends[picked] - 1) // 2
    return [(int(lag), float(val)) for lag, val in zip(centers, run_values[picked])]
