"""Turn a recording plus a pattern dictionary into a timeline of events.

Impulse patterns: local maxima of the normalized cross-correlation above
the impulse threshold become candidates; candidates of all patterns then
go through greedy non-maximum suppression so that near-simultaneous,
sound-alike patterns cannot both fire.

Continuous patterns: the correlation of a sustained sound against its
short pattern swings through the full +/- range as the alignment phase
drifts, so the trace is rectified before the boxcar average; an event
spans every maximal stretch where that averaged magnitude stays above
the continuous threshold for at least the minimum duration.

Each surviving event gets a strength: the square root of the energy
ratio between the extracted instance and its reference pattern, so a
louder "Tick" yields a proportionally stronger event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .audio import AudioClip, resample
from .correlate import (
    CorrelationTrace,
    energy,
    find_local_maxima,
    moving_average,
    normalized_cross_correlate,
)
from .errors import DetectionError
from .timeline import EventInstance, PatternKind, Timeline, Track


@dataclass(frozen=True)
class SoundPattern:
    """A dictionary entry: one short template sound bound to an action id."""

    id: str
    clip: AudioClip
    kind: PatternKind

    def __post_init__(self):
        if not self.id:
            raise ValueError("pattern id must be non-empty")
        if len(self.clip) == 0 or float(np.dot(self.clip.samples, self.clip.samples)) <= 0.0:
            raise ValueError(f"pattern {self.id!r} has zero energy")

    @property
    def duration_s(self) -> float:
        return self.clip.duration_s


@dataclass(frozen=True)
class DetectorConfig:
    impulse_threshold: float = 0.5
    continuous_threshold: float = 0.5
    continuous_min_duration_s: float = 0.15
    suppression: bool = True

    def __post_init__(self):
        for name in ("impulse_threshold", "continuous_threshold"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")
        if self.continuous_min_duration_s < 0:
            raise ValueError(f"continuous_min_duration_s must be >= 0, got {self.continuous_min_duration_s}")


@dataclass(frozen=True)
class Candidate:
    pattern_id: str
    lag_time_s: float
    correlation_value: float


def detect_impulse_candidates(s: AudioClip, pattern: SoundPattern, cfg: DetectorConfig) -> list[Candidate]:
    """Local correlation maxima above the impulse threshold, as candidates."""
    if pattern.kind is not PatternKind.IMPULSE:
        raise DetectionError(f"pattern {pattern.id!r} is not an impulse pattern")
    trace = normalized_cross_correlate(s, pattern.clip)
    return [
        Candidate(pattern.id, lag / trace.sample_rate_hz, value)
        for lag, value in find_local_maxima(trace, cfg.impulse_threshold)
    ]


def suppress(candidates: Sequence[Candidate], patterns: Mapping[str, SoundPattern]) -> list[Candidate]:
    """Greedy cross-pattern non-maximum suppression.

    Candidates are visited by descending correlation value (ties: earlier
    time, then pattern id). One is kept only if no already-kept candidate
    lies within half the kept candidate's own pattern duration of it.
    Returns the survivors sorted by time.
    """
    ordered = sorted(candidates, key=lambda c: (-c.correlation_value, c.lag_time_s, c.pattern_id))
    kept: list[Candidate] = []
    for cand in ordered:
        clear = all(
            abs(cand.lag_time_s - other.lag_time_s) > patterns[other.pattern_id].duration_s / 2
            for other in kept
        )
        if clear:
            kept.append(cand)
    return sorted(kept, key=lambda c: (c.lag_time_s, c.pattern_id))


def _continuous_intervals(
    s: AudioClip, pattern: SoundPattern, cfg: DetectorConfig
) -> list[tuple[float, float, float]]:
    """(t_begin, t_end, peak averaged magnitude) per detected interval.

    The correlation at lag tau scores the window [tau, tau+dt], so lags
    stay high only while a whole pattern still fits inside the sound:
    onsets of a segment [b, e] span [b, e-dt]. The reported interval adds
    the pattern duration back to the run's end so it describes when the
    sound is playing; runs whose supports then touch are merged.
    """
    trace = normalized_cross_correlate(s, pattern.clip)
    rectified = CorrelationTrace(np.abs(trace.values), trace.sample_rate_hz, trace.normalized)
    averaged = moving_average(rectified, pattern.duration_s)
    above = averaged.values > cfg.continuous_threshold
    if not above.any():
        return []
    sr = averaged.sample_rate_hz
    flat = np.flatnonzero(above)
    breaks = np.flatnonzero(np.diff(flat) > 1)
    run_starts = np.concatenate(([flat[0]], flat[breaks + 1]))
    run_ends = np.concatenate((flat[breaks], [flat[-1]]))  # inclusive
    intervals: list[list[float]] = []
    for i0, i1 in zip(run_starts, run_ends):
        begin = i0 / sr
        end = min((i1 + 1) / sr + pattern.duration_s, s.duration_s)
        peak = float(np.max(averaged.values[i0 : i1 + 1]))
        if intervals and begin <= intervals[-1][1]:
            intervals[-1][1] = max(intervals[-1][1], end)
            intervals[-1][2] = max(intervals[-1][2], peak)
        else:
            intervals.append([begin, end, peak])
    return [
        (b, e, peak)
        for b, e, peak in intervals
        if e - b >= cfg.continuous_min_duration_s - 1e-12
    ]


def detect_continuous_events(
    s: AudioClip, pattern: SoundPattern, cfg: DetectorConfig
) -> list[tuple[float, float]]:
    """Maximal intervals where the averaged correlation magnitude stays high."""
    if pattern.kind is not PatternKind.CONTINUOUS:
        raise DetectionError(f"pattern {pattern.id!r} is not a continuous pattern")
    return [(b, e) for b, e, _ in _continuous_intervals(s, pattern, cfg)]


def _slice_seconds(s: AudioClip, t0: float, t1: float) -> AudioClip:
    n = len(s)
    i0 = min(max(int(round(t0 * s.sample_rate_hz)), 0), n)
    i1 = min(max(int(round(t1 * s.sample_rate_hz)), 0), n)
    return AudioClip(s.samples[i0:max(i0, i1)], s.sample_rate_hz)


def extract_instance(s: AudioClip, event: EventInstance, pattern: Optional[SoundPattern] = None) -> AudioClip:
    """Cut the signal portion an event refers to, clamped to the recording.

    Impulse events cover half a pattern duration on each side of their
    time (pass the pattern so the window width is known); continuous
    events cover exactly their interval.
    """
    if event.onset_s < 0 or event.end_s > s.duration_s:
        raise DetectionError(
            f"event for {event.pattern_id!r} at {event.onset_s} lies outside the signal [0, {s.duration_s}]"
        )
    if event.kind is PatternKind.IMPULSE:
        if pattern is None:
            raise DetectionError("impulse extraction needs the pattern to size its window")
        half = pattern.duration_s / 2
        return _slice_seconds(s, event.t_s - half, event.t_s + half)
    return _slice_seconds(s, event.t_begin_s, event.t_end_s)


def strength(instance: AudioClip, pattern: SoundPattern) -> float:
    """sqrt of the instance/pattern energy ratio; 1.0 means voiced as loud as the reference."""
    reference = energy(pattern.clip)
    if reference <= 0.0:
        raise DetectionError(f"pattern {pattern.id!r} has zero energy")
    return math.sqrt(energy(instance) / reference)


def _aligned(pattern: SoundPattern, rate: int) -> SoundPattern:
    if pattern.clip.sample_rate_hz == rate:
        return pattern
    return replace(pattern, clip=resample(pattern.clip, rate))


def detect(
    s: AudioClip,
    patterns: Sequence[SoundPattern],
    cfg: Optional[DetectorConfig] = None,
    track_id: str = "main",
    source_audio: Optional[str] = None,
) -> Timeline:
    """Run the full pipeline over one recording; returns a one-track timeline.

    Patterns recorded at a different rate are resampled to the sequence's
    rate first so all lags share one time base. Event times are onsets:
    the instant the instance starts inside the recording.
    """
    if not patterns:
        raise DetectionError("pattern dictionary is empty")
    ids = [p.id for p in patterns]
    if len(set(ids)) != len(ids):
        raise DetectionError("pattern ids must be unique")
    cfg = cfg or DetectorConfig()
    aligned = {p.id: _aligned(p, s.sample_rate_hz) for p in patterns}

    candidates: list[Candidate] = []
    for pattern in aligned.values():
        if pattern.kind is PatternKind.IMPULSE:
            candidates.extend(detect_impulse_candidates(s, pattern, cfg))
    if cfg.suppression:
        kept = suppress(candidates, aligned)
    else:
        kept = sorted(candidates, key=lambda c: (c.lag_time_s, c.pattern_id))

    events = []
    for cand in kept:
        pattern = aligned[cand.pattern_id]
        # energy window spans the instance support: [onset, onset + pattern duration]
        instance = _slice_seconds(s, cand.lag_time_s, cand.lag_time_s + pattern.duration_s)
        events.append(
            EventInstance(
                pattern_id=cand.pattern_id,
                kind=PatternKind.IMPULSE,
                t_s=cand.lag_time_s,
                strength=strength(instance, pattern),
                peak_correlation=cand.correlation_value,
            )
        )
    for pattern in aligned.values():
        if pattern.kind is not PatternKind.CONTINUOUS:
            continue
        for t_begin, t_end, peak in _continuous_intervals(s, pattern, cfg):
            instance = _slice_seconds(s, t_begin, t_end)
            events.append(
                EventInstance(
                    pattern_id=pattern.id,
                    kind=PatternKind.CONTINUOUS,
                    t_begin_s=t_begin,
                    t_end_s=t_end,
                    strength=strength(instance, pattern),
                    peak_correlation=peak,
                )
            )

    track = Track(track_id=track_id, events=tuple(events), source_audio=source_audio)
    return Timeline(tracks=(track,), duration_s=s.duration_s)
