"""Spectral heart-rate estimation from pulse waveforms.

The physiological passband is 0.7-3.5 Hz (42-210 bpm). Filtering is a
zero-phase (forward-backward) 3rd-order Butterworth band-pass; spectra are
Hann-tapered periodograms zero-padded to at least 8x the window length.

Heart rate is picked from up to five in-band spectral peaks by harmonic
scoring: a candidate at p Hz is scored by the band power within +/-w of p
plus the band power within +/-2w of 2p, which rejects sub-harmonic and
motion peaks that lack a first harmonic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.signal

from .errors import (
    DegenerateSpectrumError,
    NoPeaksError,
    NoWindowsError,
    SampleRateTooLowError,
    SpectrumTooShortError,
    UsageError,
)
from .signals import PulseWaveform, Psd, zero_mean

PASSBAND_HZ = (0.7, 3.5)
FILTER_ORDER = 3
PSD_PAD_FACTOR = 8
PSD_MIN_SAMPLES = 64
SNR_HALFWIDTH_HZ = 0.1
NOTCH_HALFWIDTH_HZ = 0.05
MAX_PEAKS = 5
PEAK_PROMINENCE_FRAC = 0.05
SNR_CAP = 100.0


@lru_cache(maxsize=32)
def _bandpass_sos(fps: float, lo_hz: float, hi_hz: float, order: int) -> np.ndarray:
    return scipy.signal.butter(order, (lo_hz, hi_hz), btype="bandpass", output="sos", fs=fps)


def bandpass_series(
    x: np.ndarray,
    fps: float,
    band: tuple[float, float] = PASSBAND_HZ,
    order: int = FILTER_ORDER,
) -> np.ndarray:
    """Zero-phase Butterworth band-pass of a raw sample array."""
    if fps <= 2.0 * band[1]:
        raise SampleRateTooLowError(
            f"fps {fps} leaves no headroom above the {band[1]} Hz band edge"
        )
    x = np.asarray(x, dtype=np.float64)
    sos = _bandpass_sos(float(fps), band[0], band[1], order)
    padlen = min(3 * (2 * sos.shape[0] + 1), x.shape[-1] - 1)
    return scipy.signal.sosfiltfilt(sos, x, padlen=padlen)


def bandpass(wave: PulseWaveform, band: tuple[float, float] = PASSBAND_HZ) -> PulseWaveform:
    return PulseWaveform(zero_mean(bandpass_series(wave.samples, wave.fps, band)), wave.fps)


def _next_pow2(n: int) -> int:
    return 1 << (int(n) - 1).bit_length()


def psd(wave: PulseWaveform, pad_factor: int = PSD_PAD_FACTOR) -> Psd:
    """Hann-tapered periodogram, zero-padded to >= pad_factor x the length."""
    n = len(wave)
    if n < PSD_MIN_SAMPLES:
        raise SpectrumTooShortError(f"need >= {PSD_MIN_SAMPLES} samples, got {n}")
    nfft = _next_pow2(pad_factor * n)
    freqs, power = scipy.signal.periodogram(
        wave.samples, fs=wave.fps, window="hann", nfft=nfft, detrend=False
    )
    return Psd(freqs=freqs, power=power, resolution_hz=wave.fps / nfft)


def suppress_artifacts(
    spectrum: Psd,
    notch_hz,
    halfwidth_hz: float = NOTCH_HALFWIDTH_HZ,
) -> Psd:
    """Bridge over known interference lines (e.g. flicker) in a PSD.

    Power within +/-halfwidth of each notch frequency is replaced by the
    linear interpolation between the band-edge bins. Notches outside the
    spectrum are ignored.
    """
    power = spectrum.power.copy()
    f = spectrum.freqs
    for f0 in notch_hz:
        idx = np.nonzero(np.abs(f - float(f0)) <= halfwidth_hz)[0]
        if idx.size == 0:
            continue
        lo, hi = idx[0] - 1, idx[-1] + 1
        if lo < 0 and hi >= f.size:
            continue  # notch swallows the whole spectrum; nothing to bridge with
        if lo < 0:
            power[idx] = power[hi]
        elif hi >= f.size:
            power[idx] = power[lo]
        else:
            power[idx] = np.interp(f[idx], (f[lo], f[hi]), (power[lo], power[hi]))
    return Psd(freqs=f, power=power, resolution_hz=spectrum.resolution_hz)


def _check_band_coverage(spectrum: Psd, band: tuple[float, float]) -> None:
    if spectrum.freqs[0] > band[0] or spectrum.freqs[-1] < band[1]:
        raise UsageError(
            f"spectrum covers {spectrum.freqs[0]:.3f}-{spectrum.freqs[-1]:.3f} Hz, "
            f"does not span the {band[0]}-{band[1]} Hz analysis band"
        )


def select_hr(
    spectrum: Psd,
    band: tuple[float, float] = PASSBAND_HZ,
    halfwidth_hz: float = SNR_HALFWIDTH_HZ,
    max_peaks: int = MAX_PEAKS,
) -> float:
    """Harmonic-scored peak selection; returns heart rate in bpm."""
    _check_band_coverage(spectrum, band)
    f, power = spectrum.freqs, spectrum.power
    in_band = (f >= band[0]) & (f <= band[1])
    peak_floor = power[in_band].max()
    if peak_floor <= 0.0:
        raise NoPeaksError("no in-band power")
    peaks, _ = scipy.signal.find_peaks(power, prominence=PEAK_PROMINENCE_FRAC * peak_floor)
    peaks = peaks[in_band[peaks]]
    if peaks.size == 0:
        raise NoPeaksError("no in-band spectral peaks above the prominence floor")
    peaks = peaks[np.argsort(power[peaks])[::-1][:max_peaks]]
    w = halfwidth_hz

    # Open intervals: a rival peak sitting exactly w away must not leak its
    # power into this candidate's score.
    def open_band(lo, hi):
        m = (f > lo) & (f < hi)
        return float(power[m].sum())

    scores = [
        open_band(f[p] - w, f[p] + w) + open_band(2.0 * f[p] - 2.0 * w, 2.0 * f[p] + 2.0 * w)
        for p in peaks
    ]
    best = peaks[int(np.argmax(scores))]
    return 60.0 * float(f[best])


def two_harmonic_snr(
    wave: PulseWaveform,
    peak_hz: float,
    halfwidth_hz: float = SNR_HALFWIDTH_HZ,
    band: tuple[float, float] = PASSBAND_HZ,
) -> float:
    """Signal-to-noise ratio of a pulse waveform around a known rate.

    Signal power is integrated over [p-w, p+w] and [2p-2w, 2p+2w]; noise is
    everything else in the spectrum. The ratio is clamped to [0, SNR_CAP];
    a near-pure tone (noise power < 1e-12 of total) reports the cap.
    """
    if not band[0] <= peak_hz <= band[1]:
        raise UsageError(f"peak {peak_hz} Hz outside the {band} Hz band")
    if halfwidth_hz <= 0:
        raise UsageError("halfwidth must be positive")
    spectrum = psd(wave)
    total = float(spectrum.power.sum())
    if total < 1e-15:
        raise DegenerateSpectrumError("total spectral power is zero")
    w = halfwidth_hz
    num = spectrum.band_power(peak_hz - w, peak_hz + w)
    num += spectrum.band_power(2.0 * peak_hz - 2.0 * w, 2.0 * peak_hz + 2.0 * w)
    den = total - num
    if den <= 1e-12 * total:
        return SNR_CAP
    return float(np.clip(num / den, 0.0, SNR_CAP))


@dataclass(frozen=True)
class WindowPlan:
    """Sliding analysis windows: start offsets in seconds."""

    window_s: float
    hop_s: float
    starts: tuple[float, ...]

    def frame_slices(self, fps: float) -> list[slice]:
        n = int(round(self.window_s * fps))
        return [slice(int(round(s * fps)), int(round(s * fps)) + n) for s in self.starts]


def plan_windows(duration_s: float, window_s: float = 10.0, hop_s: float = 5.0) -> WindowPlan:
    if window_s <= 0 or hop_s <= 0:
        raise UsageError("window and hop must be positive")
    starts = []
    k = 0
    while k * hop_s + window_s <= duration_s + 1e-9:
        starts.append(k * hop_s)
        k += 1
    return WindowPlan(window_s=window_s, hop_s=hop_s, starts=tuple(starts))


@dataclass(frozen=True)
class HrEstimate:
    window_bpm: tuple[float, ...]
    video_bpm: float


def estimate_video_hr(
    waveforms,
    notch_hz=(),
    band: tuple[float, float] = PASSBAND_HZ,
    halfwidth_hz: float = SNR_HALFWIDTH_HZ,
) -> HrEstimate:
    """Per-window harmonic peak selection, then the mean across windows."""
    waveforms = list(waveforms)
    if not waveforms:
        raise NoWindowsError("no analysis windows fit in the recording")
    bpm = []
    for wave in waveforms:
        spectrum = suppress_artifacts(psd(wave), notch_hz)
        bpm.append(select_hr(spectrum, band=band, halfwidth_hz=halfwidth_hz))
    return HrEstimate(window_bpm=tuple(bpm), video_bpm=float(np.mean(bpm)))
