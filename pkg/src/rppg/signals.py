"""Shared waveform containers used across the extraction pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RgbTrace:
    """Per-frame mean RGB of some region. samples has shape (n, 3)."""

    samples: np.ndarray
    fps: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 2 or s.shape[1] != 3:
            raise ValueError(f"RgbTrace samples must be (n, 3), got {s.shape}")
        if s.shape[0] < 1:
            raise ValueError("RgbTrace needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise ValueError("RgbTrace samples must be finite")
        if np.any(s < 0.0):
            raise ValueError("RgbTrace components must be non-negative")
        if not self.fps > 0:
            raise ValueError("RgbTrace fps must be positive")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.fps


@dataclass(frozen=True)
class PulseWaveform:
    """Zero-mean scalar pulse signal at the video frame rate."""

    samples: np.ndarray
    fps: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1:
            raise ValueError("PulseWaveform samples must be one-dimensional")
        if not np.all(np.isfinite(s)):
            raise ValueError("PulseWaveform samples must be finite")
        if not self.fps > 0:
            raise ValueError("PulseWaveform fps must be positive")
        rms = float(np.sqrt(np.mean(s * s))) if s.size else 0.0
        if rms > 0 and abs(float(s.mean())) > 1e-9 * rms:
            raise ValueError("PulseWaveform must be zero-mean")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.shape[0]


def zero_mean(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x - x.mean() if x.size else x


@dataclass(frozen=True)
class Psd:
    """One-sided power spectral density on a uniform frequency grid."""

    freqs: np.ndarray
    power: np.ndarray
    resolution_hz: float

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=np.float64)
        p = np.asarray(self.power, dtype=np.float64)
        if f.shape != p.shape or f.ndim != 1 or f.size < 2:
            raise ValueError("Psd needs matching 1-d freqs/power with >= 2 bins")
        df = np.diff(f)
        if np.any(df <= 0):
            raise ValueError("Psd freqs must be ascending")
        if not np.allclose(df, self.resolution_hz, rtol=1e-6, atol=1e-12):
            raise ValueError("Psd freqs must be uniformly spaced at resolution_hz")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("Psd power must be finite and non-negative")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "power", p)

    def band_power(self, lo_hz: float, hi_hz: float) -> float:
        """Sum of power bins with lo_hz <= f <= hi_hz (inclusive)."""
        m = (self.freqs >= lo_hz) & (self.freqs <= hi_hz)
        return float(self.power[m].sum())
