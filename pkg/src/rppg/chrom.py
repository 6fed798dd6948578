"""Chrominance-based pulse extraction (CHROM, de Haan & Jeanne 2013).

Each channel is normalized by its window mean, projected onto the two
chrominance axes Xs = 3Rn - 2Gn and Ys = 1.5Rn + Gn - 1.5Bn, band-passed,
and recombined as S = Xf - alpha*Yf with alpha = sigma(Xf)/sigma(Yf). The
alpha ratio adapts the specular/skin-tone rejection to the actual window.
"""

from __future__ import annotations

import numpy as np

from .errors import TraceTooShortError, ZeroChannelMeanError
from .heartrate import bandpass_series
from .signals import PulseWaveform, RgbTrace, zero_mean

MIN_TRACE_SECONDS = 2.0
SIGMA_FLOOR = 1e-12


def chrom(trace: RgbTrace) -> PulseWaveform:
    n = len(trace)
    if n < MIN_TRACE_SECONDS * trace.fps:
        raise TraceTooShortError(
            f"{n} samples at {trace.fps} fps is under {MIN_TRACE_SECONDS} s"
        )
    means = trace.samples.mean(axis=0)
    if np.any(means <= SIGMA_FLOOR):
        raise ZeroChannelMeanError(f"channel means {means} must all be positive")
    rn, gn, bn = (trace.samples / means).T
    xs = 3.0 * rn - 2.0 * gn
    ys = 1.5 * rn + gn - 1.5 * bn
    xf = bandpass_series(xs, trace.fps)
    yf = bandpass_series(ys, trace.fps)
    sigma_y = float(yf.std())
    alpha = 0.0 if sigma_y < SIGMA_FLOOR else float(xf.std()) / sigma_y
    return PulseWaveform(zero_mean(xf - alpha * yf), trace.fps)
