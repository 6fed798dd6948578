"""Synthetic test videos with known heart rate and camera noise.

A scene is a uniform skin patch rendered through the biophysical
reflectance model: the blood volume fraction oscillates at the requested
heart rate, per-channel intensities are the illuminant/sensitivity-weighted
reflectance scaled to 8-bit range, and each pixel carries a static albedo
texture (small multiplicative variation) so that sub-level pulse amplitudes
survive integer quantization by spatial dithering. Optional extras: an
additive achromatic specular rectangle (clipped at 255), bbox motion
jitter, and a shot/read/quantization noise chain matching the camera noise
model (Poisson with variance p/g, Gaussian sigma_r/g, integer rounding).

Rendering is deterministic: all randomness derives from per-frame
counter-based generator streams seeded from (seed, stream tag, frame).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .biophysics import (
    CameraNoiseParams,
    SkinParams,
    SpectralContext,
    reflectance_over_blood,
)
from .errors import InvalidSceneError
from .ingest import (
    FrameSequence,
    GroundTruth,
    LandmarkRecord,
    LandmarkSidecar,
    write_landmarks,
    write_raw_stream,
    write_frame_dir,
    write_timeseries_csv,
)

_STREAM_TEXTURE = 0xA1
_STREAM_MOTION = 0xB2
_STREAM_NOISE = 0xC3

SECOND_HARMONIC_FRACTION = 0.25


@dataclass(frozen=True)
class SpecularPatch:
    """Axis-aligned rectangle (x, y, w, h) of additive achromatic highlight."""

    rect: tuple[int, int, int, int]
    strength: float


@dataclass(frozen=True)
class SynthScene:
    width: int = 48
    height: int = 48
    fps: float = 30.0
    duration_s: float = 30.0
    hr_bpm: float = 72.0
    skin: SkinParams = field(default_factory=SkinParams)
    noise: CameraNoiseParams = field(default_factory=CameraNoiseParams)
    shot_noise: bool = True
    specular: SpecularPatch | None = None
    motion_px: int = 0
    exposure: float = 2.0
    texture_amplitude: float = 0.05
    two_harmonic: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise InvalidSceneError("frames must be at least 8x8")
        if self.fps <= 7.0:
            raise InvalidSceneError("fps must exceed 7 Hz")
        if self.duration_s < 10.0:
            raise InvalidSceneError("scene must cover at least one 10 s window")
        if not 42.0 <= self.hr_bpm <= 210.0:
            raise InvalidSceneError("hr_bpm must lie in [42, 210]")
        if not 0.0 <= self.texture_amplitude <= 0.5:
            raise InvalidSceneError("texture_amplitude must lie in [0, 0.5]")
        if self.exposure <= 0:
            raise InvalidSceneError("exposure must be positive")
        if self.motion_px < 0 or 2 * self.motion_px >= min(self.width, self.height):
            raise InvalidSceneError("motion_px must be small against the frame")
        if self.specular is not None:
            x, y, w, h = self.specular.rect
            if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > self.width or y + h > self.height:
                raise InvalidSceneError(f"specular rect {self.specular.rect} outside frame")
            if self.specular.strength < 0:
                raise InvalidSceneError("specular strength must be non-negative")

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_s * self.fps))


def _pulse_shape(phase: np.ndarray, two_harmonic: bool) -> np.ndarray:
    shape = np.sin(phase)
    if two_harmonic:
        shape = shape + SECOND_HARMONIC_FRACTION * np.sin(2.0 * phase)
    return shape


def blood_fraction_series(scene: SynthScene) -> tuple[np.ndarray, np.ndarray]:
    """Times and f_blood(t) = mean + delta * pulse shape."""
    t = np.arange(scene.n_frames) / scene.fps
    phase = 2.0 * np.pi * (scene.hr_bpm / 60.0) * t
    fb = scene.skin.f_blood + scene.skin.delta_f_blood * _pulse_shape(phase, scene.two_harmonic)
    return t, fb


def _base_intensities(scene: SynthScene, ctx: SpectralContext, fb: np.ndarray) -> np.ndarray:
    """Clean per-frame RGB levels (n, 3) before texture, specular, noise."""
    lam = ctx.wavelengths_nm
    refl = reflectance_over_blood(scene.skin, lam, fb)
    out = np.empty((fb.size, 3))
    for c, name in enumerate("rgb"):
        w = ctx.illuminant * ctx.channel(name)
        out[:, c] = 255.0 * scene.exposure * np.trapezoid(w * refl, lam) / np.trapezoid(w, lam)
    return out


def render(scene: SynthScene, ctx: SpectralContext | None = None):
    """Render a scene; returns (FrameSequence, LandmarkSidecar, GroundTruth)."""
    ctx = ctx or SpectralContext.default()
    t, fb = blood_fraction_series(scene)
    base = _base_intensities(scene, ctx, fb)

    h, w = scene.height, scene.width
    rng_tex = np.random.default_rng((scene.seed, _STREAM_TEXTURE))
    albedo = 1.0 + scene.texture_amplitude * rng_tex.uniform(-1.0, 1.0, size=(h, w))

    noise = scene.noise
    frames = np.empty((scene.n_frames, h, w, 3), dtype=np.uint8)
    records = []
    m = scene.motion_px
    for i in range(scene.n_frames):
        clean = base[i][None, None, :] * albedo[:, :, None]
        if scene.specular is not None:
            x, y, pw, ph = scene.specular.rect
            clean = clean.copy()
            clean[y : y + ph, x : x + pw, :] += scene.specular.strength
        clean = np.clip(clean, 0.0, 255.0)
        levels = clean
        if scene.shot_noise or noise.sigma_read > 0:
            rng = np.random.default_rng((scene.seed, _STREAM_NOISE, i))
            if scene.shot_noise:
                levels = rng.poisson(levels * noise.gain).astype(np.float64) / noise.gain
            if noise.sigma_read > 0:
                levels = levels + rng.normal(0.0, noise.sigma_read / noise.gain, size=clean.shape)
        frames[i] = np.clip(np.rint(levels), 0.0, 255.0).astype(np.uint8)

        if m > 0:
            rng_m = np.random.default_rng((scene.seed, _STREAM_MOTION, i))
            dx, dy = rng_m.integers(-m, m + 1, size=2)
        else:
            dx = dy = 0
        records.append(
            LandmarkRecord(
                frame=i,
                bbox=(m + int(dx), m + int(dy), w - 2 * m, h - 2 * m),
                eye_polygons=((), ()),
                mouth_polygon=(),
            )
        )

    seq = FrameSequence(frames=frames, fps=scene.fps)
    sidecar = LandmarkSidecar(records=tuple(records))
    hr_t = np.arange(0.0, scene.duration_s - 1e-9, 1.0)
    gt = GroundTruth(
        ppg_time_s=t,
        ppg_value=fb,
        hr_time_s=hr_t,
        hr_bpm=np.full(hr_t.shape, scene.hr_bpm),
    )
    return seq, sidecar, gt


def write_scene_dataset(scene: SynthScene, outdir: Path, layout: str = "raw") -> dict:
    """Render and persist a scene; returns the file map."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    seq, sidecar, gt = render(scene)
    if layout == "raw":
        frames_path = outdir / "frames.raw"
        write_raw_stream(seq, frames_path)
    elif layout == "ppm":
        frames_path = outdir / "frames"
        write_frame_dir(seq, frames_path)
    else:
        raise InvalidSceneError(f"unknown dataset layout {layout!r}")
    landmarks_path = outdir / "landmarks.jsonl"
    write_landmarks(sidecar, landmarks_path)
    hr_path = outdir / "hr.csv"
    write_timeseries_csv(gt.hr_time_s, gt.hr_bpm, hr_path)
    ppg_path = outdir / "ppg.csv"
    write_timeseries_csv(gt.ppg_time_s, gt.ppg_value, ppg_path)
    return {
        "frames": frames_path,
        "landmarks": landmarks_path,
        "hr": hr_path,
        "ppg": ppg_path,
    }
