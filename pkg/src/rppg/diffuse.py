"""Specular/diffuse separation and diffuse-strength weights.

Under the dichromatic reflection model with white illumination a pixel is
I = m_d * D + m_s * (1/3, 1/3, 1/3): a diffuse chromaticity D scaled by
shading plus an achromatic specular lobe. Following the real-time bilateral
scheme of Yang, Wang & Ahuja (ECCV 2010), the maximum-chromaticity image
sigma_max = I_max / (R + G + B) is iteratively smoothed by a joint bilateral
filter (guided by the specular-stable minimum chromaticity) to estimate the
maximum *diffuse* chromaticity Lambda per pixel; the specular magnitude then
follows in closed form,

    m_s = 3 * (I_max - Lambda * I_sum) / (1 - 3 * Lambda),

and is subtracted from all channels. Pixels with Lambda at the achromatic
point 1/3 are left untouched (they carry no chroma evidence either way).

A much cheaper specular-free fallback (subtract the per-pixel minimum
channel) is available for large batch runs where only the *weighting*
behaviour matters, not the reconstruction quality.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyRegionError
from .roi import GridSpec

SPATIAL_SIGMA_PX = 5.0
RANGE_SIGMA = 0.05
WINDOW_PX = 11
CONVERGENCE_TOL = 0.03
MAX_ITERATIONS = 10
ACHROMATIC_EPS = 0.005
DARK_FLOOR = 1e-6


def _chromaticities(frames: np.ndarray):
    """Max/min chromaticity maps for a float32 frame stack (t, h, w, 3)."""
    total = frames.sum(axis=-1)
    dark = total < DARK_FLOOR
    safe = np.where(dark, 1.0, total)
    smax = np.where(dark, 1.0 / 3.0, frames.max(axis=-1) / safe).astype(np.float32)
    smin = np.where(dark, 1.0 / 3.0, frames.min(axis=-1) / safe).astype(np.float32)
    return smax, smin


def _joint_bilateral(lam: np.ndarray, guide: np.ndarray) -> np.ndarray:
    """One joint-bilateral pass of lam (t, h, w), range-guided by guide."""
    radius = WINDOW_PX // 2
    inv_2ss = 1.0 / (2.0 * SPATIAL_SIGMA_PX**2)
    inv_2sr = 1.0 / (2.0 * RANGE_SIGMA**2)
    num = np.zeros_like(lam)
    den = np.zeros_like(lam)
    h, w = lam.shape[-2:]
    for dy in range(-radius, radius + 1):
        ys = slice(max(dy, 0), h + min(dy, 0))
        yt = slice(max(-dy, 0), h + min(-dy, 0))
        for dx in range(-radius, radius + 1):
            xs = slice(max(dx, 0), w + min(dx, 0))
            xt = slice(max(-dx, 0), w + min(-dx, 0))
            ws = np.float32(np.exp(-(dy * dy + dx * dx) * inv_2ss))
            diff = guide[..., yt, xt] - guide[..., ys, xs]
            wr = np.exp((-inv_2sr) * diff * diff)
            wr *= ws
            num[..., yt, xt] += wr * lam[..., ys, xs]
            den[..., yt, xt] += wr
    return num / den


def _reconstruct_diffuse(frames: np.ndarray, lam: np.ndarray) -> np.ndarray:
    total = frames.sum(axis=-1)
    imax = frames.max(axis=-1)
    imin = frames.min(axis=-1)
    denom = 1.0 - 3.0 * lam
    chromatic = lam > (1.0 / 3.0 + ACHROMATIC_EPS)
    ms = np.where(
        chromatic,
        3.0 * (imax - lam * total) / np.where(chromatic, denom, 1.0),
        0.0,
    )
    ms = np.clip(ms, 0.0, 3.0 * imin)
    out = frames - (ms / 3.0)[..., None]
    return np.clip(out, 0.0, 255.0).astype(np.float32)


def estimate_diffuse_stack(
    frames: np.ndarray,
    tol: float = CONVERGENCE_TOL,
    max_iterations: int = MAX_ITERATIONS,
    chunk: int = 512,
) -> np.ndarray:
    """Diffuse component of a uint8 frame stack (t, h, w, 3), as float32.

    Frames are processed in chunks; the chromaticity smoothing iterates per
    frame until the max per-pixel change drops below tol or the iteration
    cap is reached.
    """
    frames = np.asarray(frames)
    if frames.ndim != 4 or frames.shape[-1] != 3:
        raise ValueError(f"expected (t, h, w, 3) frames, got {frames.shape}")
    out = np.empty(frames.shape, dtype=np.float32)
    for start in range(0, frames.shape[0], chunk):
        block = frames[start : start + chunk].astype(np.float32)
        smax, smin = _chromaticities(block)
        lam = smax.copy()
        active = np.ones(block.shape[0], dtype=bool)
        for _ in range(max_iterations):
            if not active.any():
                break
            smoothed = _joint_bilateral(lam[active], smin[active])
            new = np.maximum(smax[active], smoothed)
            delta = np.abs(new - lam[active]).max(axis=(1, 2))
            lam[active] = new
            active[np.nonzero(active)[0][delta < tol]] = False
        out[start : start + chunk] = _reconstruct_diffuse(block, lam)
    return out


def estimate_diffuse(frame: np.ndarray, **kwargs) -> np.ndarray:
    """Single-frame convenience wrapper around estimate_diffuse_stack."""
    return estimate_diffuse_stack(np.asarray(frame)[None], **kwargs)[0]


def specular_free_min_subtract(frames: np.ndarray) -> np.ndarray:
    """Cheap specular-free image: subtract the per-pixel minimum channel.

    Removes any additive achromatic lobe exactly (along with a chunk of the
    diffuse body colour, so it is only suitable for relative weighting).
    """
    frames = np.asarray(frames).astype(np.float32)
    return frames - frames.min(axis=-1, keepdims=True)


def diffuse_luminance(diffuse_frames: np.ndarray) -> np.ndarray:
    """(R + G + B) / 3 of a diffuse stack; accepts (..., 3) or pre-reduced."""
    d = np.asarray(diffuse_frames)
    if d.ndim >= 1 and d.shape[-1] == 3:
        return d.mean(axis=-1, dtype=np.float64)
    return d.astype(np.float64)


def diffuse_weights(diffuse_frames: np.ndarray, grid: GridSpec, masks: np.ndarray) -> np.ndarray:
    """Per-cell diffuse-strength weights, normalized to sum to one.

    weight(cell) is the mean diffuse luminance over all (frame, masked
    pixel) pairs that fall in the cell; cells that never see a masked pixel
    get weight zero.
    """
    lum = diffuse_luminance(diffuse_frames)
    masks = np.asarray(masks, dtype=bool)
    if lum.shape != masks.shape:
        raise ValueError(f"diffuse {lum.shape} and masks {masks.shape} disagree")
    labels = grid.label_map(masks.shape[2], masks.shape[1])
    n = grid.n_cells
    sums = np.zeros(n)
    counts = np.zeros(n)
    for t in range(masks.shape[0]):
        sel = masks[t] & (labels >= 0)
        lab = labels[sel]
        sums += np.bincount(lab, weights=lum[t][sel], minlength=n)
        counts += np.bincount(lab, minlength=n)
    if counts.sum() == 0:
        raise EmptyRegionError("no masked pixels fall inside the grid")
    weights = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    total = weights.sum()
    if total <= 0:
        # all-black diffuse region: no luminance evidence, weight evenly
        weights = (counts > 0) / max(1, int((counts > 0).sum()))
        return weights.astype(np.float64)
    return weights / total
