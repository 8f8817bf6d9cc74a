"""Deterministic synthetic patterns and sequences with exact ground truth.

These stand in for voiced recordings in tests and fixtures: every
generated sample is a pure function of integer seeds (PCG64 streams), so
fixtures are byte-identical across runs and platforms.

Patterns are triangle-enveloped bursts. Tonal bursts lock their carrier
to a whole number of cycles per half pattern, which matters for
continuous instances: tiling copies at 50% overlap then crossfades
linearly into a constant-amplitude, phase-coherent sustained tone,
exactly the kind of signal the continuous detection rule expects.

A plan can also degrade an instance ("distort") by blending in an
equal-energy unrelated noise burst; that lowers the correlation peak a
planted instance scores without changing its strength, which is how
threshold-behavior fixtures are built.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional

import numpy as np

from . import docio
from .audio import AudioClip
from .errors import PlanError, SchemaError
from .timeline import PatternKind

_SEED_MASK = (1 << 63) - 1

PATTERN_PEAK = 0.9


@dataclass(frozen=True)
class PlantedInstance:
    """One planned occurrence: an onset (impulse) or an interval (continuous)."""

    pattern_id: str
    onset_s: Optional[float] = None
    t_begin_s: Optional[float] = None
    t_end_s: Optional[float] = None
    amplitude: float = 1.0
    distort: float = 0.0
    distort_seed: int = 0

    def __post_init__(self):
        is_impulse = self.onset_s is not None
        is_interval = self.t_begin_s is not None or self.t_end_s is not None
        if is_impulse == is_interval:
            raise ValueError("a planted instance carries either onset_s or t_begin_s/t_end_s")
        if is_interval and (self.t_begin_s is None or self.t_end_s is None or not self.t_begin_s < self.t_end_s):
            raise ValueError(f"planted interval needs t_begin_s < t_end_s, got [{self.t_begin_s}, {self.t_end_s}]")
        if self.amplitude <= 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not 0.0 <= self.distort < 1.0:
            raise ValueError(f"distort must lie in [0, 1), got {self.distort}")

    @property
    def kind(self) -> PatternKind:
        return PatternKind.IMPULSE if self.onset_s is not None else PatternKind.CONTINUOUS


@dataclass(frozen=True)
class GroundTruth:
    """The full construction plan; doubles as the expected detection output."""

    duration_s: float
    sample_rate_hz: int
    seed: int
    noise_rms: float
    planted: tuple
    allow_overlap: bool = False

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be positive, got {self.duration_s}")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if self.noise_rms < 0:
            raise ValueError(f"noise_rms must be >= 0, got {self.noise_rms}")
        object.__setattr__(self, "planted", tuple(self.planted))


def _triangle_window(n: int) -> np.ndarray:
    """Linear fade up then down; halves are exact complements, so copies
    overlap-added at hop n/2 sum to 1."""
    half = n // 2
    up = np.arange(half) / half
    return np.concatenate((up, 1.0 - up))


def make_pattern(shape: str, duration_s: float, seed: int, sample_rate_hz: int = 44100) -> AudioClip:
    """A short deterministic burst usable as a dictionary pattern.

    tonal_burst: enveloped sine whose frequency (roughly 300-3000 Hz,
    snapped to whole cycles per half pattern) and phase derive from the
    seed. noise_burst: enveloped Gaussian noise. Both peak at 0.9.
    """
    if duration_s <= 0:
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    n = int(round(duration_s * sample_rate_hz))
    n -= n % 2
    if n < 4:
        raise ValueError(f"pattern too short: {duration_s} s at {sample_rate_hz} Hz")
    rng = np.random.default_rng(int(seed) & _SEED_MASK)
    window = _triangle_window(n)
    if shape == "tonal_burst":
        hop_s = (n // 2) / sample_rate_hz
        lo = max(2, int(np.ceil(300.0 * hop_s)))
        hi = max(lo + 1, int(np.floor(3000.0 * hop_s)))
        cycles_per_hop = int(rng.integers(lo, hi + 1))
        freq = cycles_per_hop / hop_s
        phase = rng.uniform(0.0, 2.0 * np.pi)
        t = np.arange(n) / sample_rate_hz
        x = window * np.sin(2.0 * np.pi * freq * t + phase)
    elif shape == "noise_burst":
        x = window * rng.standard_normal(n)
    else:
        raise ValueError(f"unknown pattern shape {shape!r}")
    x *= PATTERN_PEAK / np.max(np.abs(x))
    return AudioClip(x, sample_rate_hz)


def _distortion_noise(n: int, seed: int, reference: np.ndarray) -> np.ndarray:
    """Same-envelope noise scaled to the reference's energy."""
    rng = np.random.default_rng(int(seed) & _SEED_MASK)
    q = _triangle_window(n) * rng.standard_normal(n)
    return q * (np.linalg.norm(reference) / np.linalg.norm(q))


def _instance_signal(p: np.ndarray, inst: PlantedInstance) -> np.ndarray:
    if inst.distort <= 0:
        return p
    q = _distortion_noise(p.size, inst.distort_seed, p)
    x = (1.0 - inst.distort) * p + inst.distort * q
    # correlation against p ~ (1-d)/hypot(1-d, d), invariant to this rescale;
    # peak-normalize like a pattern so the mix can never clip the whole take
    return x * (PATTERN_PEAK / np.max(np.abs(x)))


def _support(inst: PlantedInstance, pattern_duration: float) -> tuple[float, float]:
    if inst.kind is PatternKind.IMPULSE:
        return inst.onset_s, inst.onset_s + pattern_duration
    return inst.t_begin_s, inst.t_end_s


def place_instances(patterns: Mapping[str, AudioClip], plan: GroundTruth) -> AudioClip:
    """Render the plan: shifted scaled pattern copies plus background noise.

    Continuous instances tile their pattern at 50% overlap; the triangle
    envelopes cross-fade linearly, so a coherent tonal pattern sustains at
    constant amplitude. The mix is rescaled only if it would clip, which
    the non-overlap check makes rare; keep planted amplitudes modest when
    absolute strengths matter.
    """
    sr = plan.sample_rate_hz
    n = int(round(plan.duration_s * sr))
    out = np.zeros(n)

    supports = []
    for inst in plan.planted:
        if inst.pattern_id not in patterns:
            raise PlanError(f"planted pattern {inst.pattern_id!r} is not defined")
        clip = patterns[inst.pattern_id]
        if clip.sample_rate_hz != sr:
            raise PlanError(f"pattern {inst.pattern_id!r} rate {clip.sample_rate_hz} != plan rate {sr}")
        begin, end = _support(inst, clip.duration_s)
        if begin < 0 or end > plan.duration_s:
            raise PlanError(
                f"instance of {inst.pattern_id!r} spans [{begin:.3f}, {end:.3f}] s, "
                f"outside the {plan.duration_s} s sequence"
            )
        supports.append((begin, end, inst.pattern_id))

    if not plan.allow_overlap:
        ordered = sorted(supports)
        for (b0, e0, id0), (b1, e1, id1) in zip(ordered, ordered[1:]):
            if b1 < e0:
                raise PlanError(
                    f"instances of {id0!r} and {id1!r} overlap around {b1:.3f} s "
                    "(set allow_overlap for collision fixtures)"
                )

    for inst in plan.planted:
        p = _instance_signal(patterns[inst.pattern_id].samples, inst)
        m = p.size
        if inst.kind is PatternKind.IMPULSE:
            i = int(round(inst.onset_s * sr))
            out[i : i + m] += inst.amplitude * p
        else:
            b = int(round(inst.t_begin_s * sr))
            e = int(round(inst.t_end_s * sr))
            hop = m // 2
            start = b
            placed = False
            while start + m <= e:
                out[start : start + m] += inst.amplitude * p
                start += hop
                placed = True
            if not placed:  # interval shorter than the pattern: truncate one copy
                out[b:e] += inst.amplitude * p[: e - b]

    if plan.noise_rms > 0:
        rng = np.random.default_rng(int(plan.seed) & _SEED_MASK)
        out += plan.noise_rms * rng.standard_normal(n)

    peak = float(np.max(np.abs(out))) if n else 0.0
    if peak > 1.0:
        out /= peak
    return AudioClip(out, sr)


@dataclass(frozen=True)
class PatternDef:
    id: str
    kind: PatternKind
    shape: str
    duration_s: float
    seed: int


@dataclass(frozen=True)
class FixturePlan:
    """A serializable plan: pattern definitions plus the ground truth."""

    duration_s: float
    sample_rate_hz: int
    seed: int
    noise_rms: float
    patterns: tuple
    planted: tuple
    allow_overlap: bool = False

    def ground_truth(self) -> GroundTruth:
        return GroundTruth(
            duration_s=self.duration_s,
            sample_rate_hz=self.sample_rate_hz,
            seed=self.seed,
            noise_rms=self.noise_rms,
            planted=self.planted,
            allow_overlap=self.allow_overlap,
        )

    def with_seed(self, seed: int) -> "FixturePlan":
        return replace(self, seed=seed)


def realize(plan: FixturePlan) -> tuple[AudioClip, dict]:
    """Generate the sequence and the pattern clips a plan describes."""
    clips = {
        d.id: make_pattern(d.shape, d.duration_s, d.seed, plan.sample_rate_hz) for d in plan.patterns
    }
    sequence = place_instances(clips, plan.ground_truth())
    return sequence, clips


def parse_plan(text: str) -> FixturePlan:
    root = docio.as_object(docio.parse_json(text, "plan"), "")
    docio.reject_unknown(
        root,
        {"duration_s", "sample_rate_hz", "seed", "noise_rms", "patterns", "planted", "allow_overlap"},
        "",
    )
    duration = docio.as_number(docio.get(root, "duration_s", ""), "duration_s")
    rate = docio.as_integer(docio.get(root, "sample_rate_hz", ""), "sample_rate_hz")
    seed = docio.as_integer(root.get("seed", 0), "seed")
    noise_rms = docio.as_number(root.get("noise_rms", 0.0), "noise_rms")
    allow_overlap = docio.as_boolean(root.get("allow_overlap", False), "allow_overlap")

    defs = []
    for i, obj in enumerate(docio.as_array(docio.get(root, "patterns", ""), "patterns")):
        path = f"patterns[{i}]"
        docio.as_object(obj, path)
        docio.reject_unknown(obj, {"id", "kind", "shape", "duration_s", "seed"}, path)
        kind_name = docio.as_string(docio.get(obj, "kind", path), f"{path}.kind")
        try:
            kind = PatternKind(kind_name)
        except ValueError:
            raise SchemaError(f"{path}.kind", f"unknown pattern kind {kind_name!r}") from None
        shape = docio.as_string(obj.get("shape", "tonal_burst"), f"{path}.shape")
        if shape not in ("tonal_burst", "noise_burst"):
            raise SchemaError(f"{path}.shape", f"unknown pattern shape {shape!r}")
        defs.append(
            PatternDef(
                id=docio.as_string(docio.get(obj, "id", path), f"{path}.id"),
                kind=kind,
                shape=shape,
                duration_s=docio.as_number(docio.get(obj, "duration_s", path), f"{path}.duration_s"),
                seed=docio.as_integer(docio.get(obj, "seed", path), f"{path}.seed"),
            )
        )
    ids = [d.id for d in defs]
    if len(set(ids)) != len(ids):
        raise SchemaError("patterns", "pattern ids must be unique")

    planted = []
    for i, obj in enumerate(docio.as_array(docio.get(root, "planted", ""), "planted")):
        path = f"planted[{i}]"
        docio.as_object(obj, path)
        docio.reject_unknown(
            obj, {"pattern", "t", "t_begin", "t_end", "amplitude", "distort", "distort_seed"}, path
        )
        pattern_id = docio.as_string(docio.get(obj, "pattern", path), f"{path}.pattern")
        if pattern_id not in ids:
            raise SchemaError(f"{path}.pattern", f"pattern {pattern_id!r} is not defined")
        fields = dict(
            amplitude=docio.as_number(obj.get("amplitude", 1.0), f"{path}.amplitude"),
            distort=docio.as_number(obj.get("distort", 0.0), f"{path}.distort"),
            distort_seed=docio.as_integer(obj.get("distort_seed", 0), f"{path}.distort_seed"),
        )
        if "t" in obj:
            fields["onset_s"] = docio.as_number(obj["t"], f"{path}.t")
        if "t_begin" in obj or "t_end" in obj:
            fields["t_begin_s"] = docio.as_number(docio.get(obj, "t_begin", path), f"{path}.t_begin")
            fields["t_end_s"] = docio.as_number(docio.get(obj, "t_end", path), f"{path}.t_end")
        try:
            planted.append(PlantedInstance(pattern_id=pattern_id, **fields))
        except ValueError as exc:
            raise SchemaError(path, str(exc)) from exc

    try:
        return FixturePlan(
            duration_s=duration,
            sample_rate_hz=rate,
            seed=seed,
            noise_rms=noise_rms,
            patterns=tuple(defs),
            planted=tuple(planted),
            allow_overlap=allow_overlap,
        )
    except ValueError as exc:
        raise SchemaError("", str(exc)) from exc


def serialize_plan(plan: FixturePlan) -> str:
    planted = []
    for inst in plan.planted:
        obj = {
            "pattern": inst.pattern_id,
            "amplitude": float(inst.amplitude),
            "distort": float(inst.distort),
            "distort_seed": int(inst.distort_seed),
        }
        if inst.kind is PatternKind.IMPULSE:
            obj["t"] = float(inst.onset_s)
        else:
            obj["t_begin"] = float(inst.t_begin_s)
            obj["t_end"] = float(inst.t_end_s)
        planted.append(obj)
    return docio.dump_json(
        {
            "duration_s": float(plan.duration_s),
            "sample_rate_hz": int(plan.sample_rate_hz),
            "seed": int(plan.seed),
            "noise_rms": float(plan.noise_rms),
            "allow_overlap": plan.allow_overlap,
            "patterns": [
                {
                    "id": d.id,
                    "kind": d.kind.value,
                    "shape": d.shape,
                    "duration_s": float(d.duration_s),
                    "seed": int(d.seed),
                }
                for d in plan.patterns
            ],
            "planted": planted,
        }
    )
