"""Short-time Fourier magnitude spectrograms cropped to an analysis band.

Frames are hop-spaced windows of the signal; a trailing partial window is
dropped rather than zero-padded. The frequency axis keeps only DFT bins whose
center frequency lies inside [band_low_hz, band_high_hz].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioRecording

WINDOW_FUNCTIONS = ("hann", "rectangular")
MAGNITUDE_SCALES = ("decibel", "linear")

_DB_FLOOR_EPS = 1e-12


@dataclass(frozen=True)
class SpectrogramParams:
    """Analysis parameters: window/hop in samples, band limits in Hz.

    The defaults give a 10 ms window with 5 ms steps at the 250 kHz canonical
    rate, i.e. 100 Hz frequency resolution over the 15-115 kHz band.
    """

    window_size: int = 2500
    hop: int = 1250
    canonical_rate: int = 250_000
    band_low_hz: float = 15_000.0
    band_high_hz: float = 115_000.0
    window_function: str = "hann"
    magnitude_scale: str = "decibel"

    def __post_init__(self) -> None:
        if self.window_size < 2:
            raise ValueError(f"window_size must be >= 2, got {self.window_size}")
        if not 0 < self.hop <= self.window_size:
            raise ValueError(f"hop must be in (0, window_size], got {self.hop}")
        if self.canonical_rate <= 0:
            raise ValueError(f"canonical_rate must be positive, got {self.canonical_rate}")
        if not 0 <= self.band_low_hz < self.band_high_hz:
            raise ValueError(
                f"band must satisfy 0 <= low < high, got [{self.band_low_hz}, {self.band_high_hz}]"
            )
        if self.band_high_hz > self.canonical_rate / 2:
            raise ValueError(
                f"band_high_hz {self.band_high_hz} exceeds Nyquist ({self.canonical_rate / 2})"
            )
        if self.window_function not in WINDOW_FUNCTIONS:
            raise ValueError(
                f"window_function must be one of {WINDOW_FUNCTIONS}, got {self.window_function!r}"
            )
        if self.magnitude_scale not in MAGNITUDE_SCALES:
            raise ValueError(
                f"magnitude_scale must be one of {MAGNITUDE_SCALES}, got {self.magnitude_scale!r}"
            )

    @property
    def freq_resolution_hz(self) -> float:
        return self.canonical_rate / self.window_size

    @property
    def frame_period_s(self) -> float:
        return self.hop / self.canonical_rate

    def band_bins(self) -> tuple[int, int]:
        """Inclusive (first, last) DFT bin indices kept by the band crop."""
        df = self.freq_resolution_hz
        lo = int(np.ceil(self.band_low_hz / df - 1e-9))
        hi = int(np.floor(self.band_high_hz / df + 1e-9))
        hi = min(hi, self.window_size // 2)
        return lo, hi


@dataclass(frozen=True)
class Spectrogram:
    """Magnitude spectrogram: values[freq_bin, frame], plus its axis maps.

    ``bin_offset`` is the DFT bin index of row 0, so row j has center
    frequency (bin_offset + j) * freq_resolution.
    """

    values: np.ndarray
    params: SpectrogramParams
    bin_offset: int
    duration_s: float

    @property
    def n_bins(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[1])

    def time_of_frame(self, frame: int | np.ndarray) -> float | np.ndarray:
        """Center time (seconds) of a frame index."""
        p = self.params
        return (frame * p.hop + p.window_size / 2) / p.canonical_rate

    def freq_of_bin(self, bin_index: int | np.ndarray) -> float | np.ndarray:
        """Center frequency (Hz) of a row index."""
        return (self.bin_offset + bin_index) * self.params.freq_resolution_hz


def n_frames_for(n_samples: int, params: SpectrogramParams) -> int:
    """Number of full analysis windows: floor((n - window) / hop) + 1."""
    if n_samples < params.window_size:
        return 0
    return (n_samples - params.window_size) // params.hop + 1


def compute_spectrogram(recording: AudioRecording, params: SpectrogramParams) -> Spectrogram:
    """Compute the band-cropped magnitude spectrogram of a recording.

    The recording must already be at the canonical rate and at least one
    window long. Decibel scale stores 20*log10(magnitude + 1e-12).
    """
    if recording.rate != params.canonical_rate:
        raise ValueError(
            f"recording rate {recording.rate} != canonical rate {params.canonical_rate}; "
            f"resample first"
        )
    n = recording.n_samples
    if n < params.window_size:
        raise ValueError(f"recording too short: {n} samples < window_size {params.window_size}")
    nf = n_frames_for(n, params)
    x = recording.samples.astype(np.float32, copy=False)
    frames = np.lib.stride_tricks.sliding_window_view(x, params.window_size)[::params.hop][:nf]
    if params.window_function == "hann":
        win = np.hanning(params.window_size).astype(np.float32)
        frames = frames * win
    mag = np.abs(np.fft.rfft(frames, axis=1)).astype(np.float32)
    lo, hi = params.band_bins()
    values = np.ascontiguousarray(mag[:, lo:hi + 1].T)
    if params.magnitude_scale == "decibel":
        values = (20.0 * np.log10(values + _DB_FLOOR_EPS)).astype(np.float32)
    return Spectrogram(values=values, params=params, bin_offset=lo,
                       duration_s=recording.duration_s)
