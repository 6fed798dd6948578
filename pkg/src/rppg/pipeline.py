"""End-to-end video -> heart-rate orchestration.

One run slices the recording into overlapping analysis windows, builds a
pulse waveform per window with the configured combination method, and
reduces the per-window rates to a single video-level estimate. The grid
methods re-anchor the cell grid to the face bbox at the start of every
window so slow drift does not smear cells across face regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chrom import chrom
from .combine import (
    combine_benchmark_snr,
    combine_proposed,
    facial_aggregate,
    grid_traces,
    snr_weights,
)
from .config import REPORT_SCHEMA_VERSION, RunConfig
from .diffuse import (
    diffuse_luminance,
    diffuse_weights,
    estimate_diffuse_stack,
    specular_free_min_subtract,
)
from .heartrate import estimate_video_hr, plan_windows
from .ingest import FrameSequence, LandmarkSidecar, smooth_bboxes
from .roi import build_grid, build_mask
from .signals import PulseWaveform


@dataclass
class PipelineResult:
    report: dict
    waveforms: list[PulseWaveform] = field(default_factory=list)
    window_weights: list[dict] = field(default_factory=list)
    diffuse_frames: np.ndarray | None = None


def _diffuse_stack(frames: np.ndarray, estimator: str) -> np.ndarray:
    if estimator == "min_subtract":
        return specular_free_min_subtract(frames)
    return estimate_diffuse_stack(frames)


def run_pipeline(
    seq: FrameSequence,
    sidecar: LandmarkSidecar,
    cfg: RunConfig,
    keep_diffuse: bool = False,
) -> PipelineResult:
    if cfg.bbox_smoothing:
        sidecar = smooth_bboxes(sidecar, cfg.bbox_smoothing_alpha)
    masks = build_mask(seq, sidecar)
    plan = plan_windows(seq.duration_s, cfg.window_s, cfg.hop_s)
    slices = plan.frame_slices(seq.fps)

    lum = None
    diffuse = None
    if cfg.method == "proposed":
        diffuse = _diffuse_stack(seq.frames, cfg.diffuse_estimator)
        lum = diffuse_luminance(diffuse)

    waves: list[PulseWaveform] = []
    weight_log: list[dict] = []
    for start_s, sl in zip(plan.starts, slices):
        fw, mw = seq.frames[sl], masks[sl]
        if cfg.method == "aggregate":
            waves.append(chrom(facial_aggregate(fw, mw, seq.fps)))
            continue
        grid = build_grid(sidecar.records[sl.start].bbox, cfg.grid_rows, cfg.grid_cols)
        traces = grid_traces(fw, mw, grid, seq.fps)
        w_snr = snr_weights(traces, cfg.snr_halfwidth_hz, cfg.passband_hz)
        if cfg.method == "snr":
            waves.append(combine_benchmark_snr(traces, w_snr))
            weight_log.append({"start_s": start_s, "snr": w_snr.tolist()})
        else:
            w_dif = diffuse_weights(lum[sl], grid, mw)
            waves.append(chrom(combine_proposed(traces, w_snr, w_dif)))
            weight_log.append(
                {"start_s": start_s, "snr": w_snr.tolist(), "diffuse": w_dif.tolist()}
            )

    est = estimate_video_hr(waves, cfg.notch_hz, cfg.passband_hz, cfg.snr_halfwidth_hz)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "method": cfg.method,
        "fps": seq.fps,
        "n_frames": seq.count,
        "windows": [
            {"start_s": s, "bpm": b} for s, b in zip(plan.starts, est.window_bpm)
        ],
        "video_bpm": est.video_bpm,
        "config": cfg.as_dict(),
    }
    return PipelineResult(
        report=report,
        waveforms=waves,
        window_weights=weight_log,
        diffuse_frames=diffuse if keep_diffuse else None,
    )
