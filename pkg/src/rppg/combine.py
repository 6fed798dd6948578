"""Combining masked pixels into pulse traces: three strategies.

* aggregate - unweighted mean of every masked pixel (the usual benchmark).
* snr - per-cell CHROM waveforms averaged with two-harmonic-SNR weights.
* proposed - per-cell *RGB traces* averaged with the product of the SNR
  weight and a diffuse-strength weight, so chrominance inference runs once
  on a single debiased trace. Weighting in RGB space keeps cells with weak
  diffuse reflection (strong melanin attenuation or specular pollution)
  from diluting the pulse before inference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chrom import chrom
from .errors import (
    AllCellsDeadError,
    DegenerateSpectrumError,
    DegenerateWeightsError,
    EmptyRegionError,
    ZeroChannelMeanError,
)
from .heartrate import PASSBAND_HZ, SNR_HALFWIDTH_HZ, psd, two_harmonic_snr
from .roi import GridSpec
from .signals import PulseWaveform, RgbTrace, zero_mean

WEIGHT_EPS = 1e-12
NORMALIZATION_TOL = 1e-6


def facial_aggregate(frames: np.ndarray, masks: np.ndarray, fps: float) -> RgbTrace:
    """Mean RGB over all masked pixels, per frame."""
    frames = np.asarray(frames)
    masks = np.asarray(masks, dtype=bool)
    if frames.shape[:3] != masks.shape:
        raise ValueError(f"frames {frames.shape} and masks {masks.shape} disagree")
    out = np.empty((frames.shape[0], 3))
    for t in range(frames.shape[0]):
        sel = masks[t]
        if not sel.any():
            raise EmptyRegionError(f"frame {t}: mask selects no pixels")
        out[t] = frames[t][sel].mean(axis=0)
    return RgbTrace(out, fps)


@dataclass(frozen=True)
class GridTraces:
    """Per-cell mean RGB traces. samples: (n_cells, n_frames, 3), row-major cells.

    Cells with no masked pixels in the first frame are dead (live=False) and
    excluded from weighting; cells that go empty in a later frame carry the
    previous sample forward.
    """

    samples: np.ndarray
    live: np.ndarray
    fps: float
    rows: int
    cols: int

    @property
    def n_cells(self) -> int:
        return self.samples.shape[0]

    def cell_trace(self, i: int) -> RgbTrace:
        return RgbTrace(self.samples[i], self.fps)


def grid_traces(frames: np.ndarray, masks: np.ndarray, grid: GridSpec, fps: float) -> GridTraces:
    frames = np.asarray(frames)
    masks = np.asarray(masks, dtype=bool)
    if frames.shape[:3] != masks.shape:
        raise ValueError(f"frames {frames.shape} and masks {masks.shape} disagree")
    n_frames = frames.shape[0]
    labels = grid.label_map(frames.shape[2], frames.shape[1])
    n = grid.n_cells
    samples = np.zeros((n, n_frames, 3))
    live = np.zeros(n, dtype=bool)
    for t in range(n_frames):
        sel = masks[t] & (labels >= 0)
        lab = labels[sel]
        counts = np.bincount(lab, minlength=n).astype(np.float64)
        vals = frames[t][sel].astype(np.float64)
        filled = counts > 0
        for c in range(3):
            sums = np.bincount(lab, weights=vals[:, c], minlength=n)
            samples[filled, t, c] = sums[filled] / counts[filled]
        if t == 0:
            live = filled
        else:
            samples[~filled, t, :] = samples[~filled, t - 1, :]  # carry forward
    return GridTraces(samples=samples, live=live, fps=fps, rows=grid.rows, cols=grid.cols)


def _cell_waveform(traces: GridTraces, i: int) -> PulseWaveform | None:
    try:
        return chrom(traces.cell_trace(i))
    except ZeroChannelMeanError:
        return None


def snr_weights(
    traces: GridTraces,
    halfwidth_hz: float = SNR_HALFWIDTH_HZ,
    band: tuple[float, float] = PASSBAND_HZ,
) -> np.ndarray:
    """Two-harmonic SNR per live cell, normalized to sum to one.

    Each live cell's trace goes through CHROM; the SNR is taken around the
    cell's own dominant in-band peak. Cells without usable spectra get
    weight zero; if no cell produces any SNR the live cells share the
    weight evenly (no spectral evidence to prefer one over another).
    """
    if not traces.live.any():
        raise AllCellsDeadError("every grid cell is empty in the first frame")
    w = np.zeros(traces.n_cells)
    for i in np.nonzero(traces.live)[0]:
        wave = _cell_waveform(traces, i)
        if wave is None:
            continue
        spectrum = psd(wave)
        in_band = (spectrum.freqs >= band[0]) & (spectrum.freqs <= band[1])
        if not in_band.any() or spectrum.power[in_band].max() <= 0.0:
            continue
        peak_hz = float(spectrum.freqs[in_band][np.argmax(spectrum.power[in_band])])
        try:
            w[i] = two_harmonic_snr(wave, peak_hz, halfwidth_hz, band)
        except DegenerateSpectrumError:
            continue
    total = w.sum()
    if total <= 0.0:
        w[traces.live] = 1.0 / int(traces.live.sum())
        return w
    return w / total


def _check_normalized(weights: np.ndarray, name: str) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1:
        raise ValueError(f"{name} must be a flat vector")
    if np.any(weights < 0):
        raise ValueError(f"{name} must be non-negative")
    if abs(weights.sum() - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"{name} must sum to one, got {weights.sum()}")
    return weights


def combine_benchmark_snr(traces: GridTraces, weights: np.ndarray) -> PulseWaveform:
    """SNR-weighted mean of the per-cell CHROM waveforms."""
    weights = _check_normalized(weights, "snr weights")
    if weights.size != traces.n_cells:
        raise ValueError("one weight per cell required")
    acc = np.zeros(traces.samples.shape[1])
    for i in np.nonzero(weights > 0)[0]:
        wave = _cell_waveform(traces, i)
        if wave is None:
            raise ZeroChannelMeanError(f"cell {i} has positive weight but no waveform")
        acc += weights[i] * wave.samples
    return PulseWaveform(zero_mean(acc), traces.fps)


def combine_proposed(
    traces: GridTraces, snr_w: np.ndarray, diffuse_w: np.ndarray
) -> RgbTrace:
    """Product-weighted mean of the raw per-cell RGB traces.

    Weights are snr_w * diffuse_w renormalized; the result feeds a single
    downstream CHROM pass.
    """
    snr_w = _check_normalized(snr_w, "snr weights")
    diffuse_w = _check_normalized(diffuse_w, "diffuse weights")
    if snr_w.size != traces.n_cells or diffuse_w.size != traces.n_cells:
        raise ValueError("one weight per cell required")
    product = snr_w * diffuse_w
    product[~traces.live] = 0.0
    total = product.sum()
    if total < WEIGHT_EPS:
        raise DegenerateWeightsError(
            "snr and diffuse weights have no overlapping support"
        )
    w = product / total
    combined = np.tensordot(w, traces.samples, axes=1)
    return RgbTrace(combined, traces.fps)
