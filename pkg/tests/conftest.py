import numpy as np
import pytest

from soundcue import (
    GroundTruth,
    PatternKind,
    PlantedInstance,
    SoundPattern,
    make_pattern,
    place_instances,
)

SR = 44100


@pytest.fixture(scope="session")
def dictionary():
    """Three distinct patterns: two impulse (tonal + noise), one continuous."""
    a = make_pattern("tonal_burst", 0.12, seed=1, sample_rate_hz=SR)
    b = make_pattern("noise_burst", 0.10, seed=2, sample_rate_hz=SR)
    c = make_pattern("tonal_burst", 0.25, seed=3, sample_rate_hz=SR)
    return {
        "tick": SoundPattern("tick", a, PatternKind.IMPULSE),
        "poc": SoundPattern("poc", b, PatternKind.IMPULSE),
        "chhh": SoundPattern("chhh", c, PatternKind.CONTINUOUS),
    }


@pytest.fixture(scope="session")
def figure_plan():
    """3 ticks, 2 pocs, one 1 s chhh segment in 10 s of -30 dB noise."""
    return GroundTruth(
        duration_s=10.0,
        sample_rate_hz=SR,
        seed=7,
        noise_rms=0.03,
        planted=(
            PlantedInstance("tick", onset_s=0.5),
            PlantedInstance("poc", onset_s=1.5),
            PlantedInstance("chhh", t_begin_s=2.0, t_end_s=3.0, amplitude=0.9),
            PlantedInstance("tick", onset_s=4.0, amplitude=0.6),
            PlantedInstance("poc", onset_s=6.2, amplitude=0.8),
            PlantedInstance("tick", onset_s=8.5),
        ),
    )


@pytest.fixture(scope="session")
def figure_sequence(dictionary, figure_plan):
    clips = {pid: p.clip for pid, p in dictionary.items()}
    return place_instances(clips, figure_plan)


def silent_clip(duration_s: float, sr: int = SR):
    from soundcue import AudioClip

    return AudioClip(np.zeros(int(round(duration_s * sr))), sr)
