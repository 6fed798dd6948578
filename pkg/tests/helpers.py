"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from rppg.ingest import FrameSequence, LandmarkRecord, LandmarkSidecar


def flat_sequence(n=64, h=12, w=16, fps=16.0, level=(120, 90, 70)) -> FrameSequence:
    frames = np.empty((n, h, w, 3), dtype=np.uint8)
    frames[...] = np.asarray(level, dtype=np.uint8)
    return FrameSequence(frames=frames, fps=fps)


def full_sidecar(seq: FrameSequence, bbox=None) -> LandmarkSidecar:
    """One record per frame, bbox covering the whole frame, no cutouts."""
    bbox = tuple(bbox) if bbox is not None else (0, 0, seq.width, seq.height)
    return LandmarkSidecar(
        records=tuple(
            LandmarkRecord(frame=i, bbox=bbox, eye_polygons=((), ()), mouth_polygon=())
            for i in range(seq.count)
        )
    )


def pulsed_sequence(
    n=300,
    h=12,
    w=16,
    fps=30.0,
    hz=1.2,
    base=(150.0, 110.0, 80.0),
    amp=(4.0, 6.0, 2.0),
    seed=None,
    noise=0.0,
) -> FrameSequence:
    """Uniform frames whose RGB means carry a clean sinusoidal pulse."""
    t = np.arange(n) / fps
    pulse = np.sin(2 * np.pi * hz * t)
    levels = np.asarray(base) + np.outer(pulse, np.asarray(amp))
    frames = np.repeat(levels[:, None, None, :], h, axis=1)
    frames = np.repeat(frames, w, axis=2)
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        frames = frames + rng.normal(0.0, noise, frames.shape)
    return FrameSequence(
        frames=np.clip(np.rint(frames), 0, 255).astype(np.uint8), fps=fps
    )
