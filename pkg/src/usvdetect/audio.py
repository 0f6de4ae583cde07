"""WAV file reading/writing and sample-rate conversion.

Recordings are represented as mono float64 sample vectors in [-1, 1]. The
reader walks RIFF chunks by identifier rather than assuming fixed offsets, so
files with LIST/fact/cue chunks or WAVE_FORMAT_EXTENSIBLE headers load fine.
Supported encodings: 16-bit PCM, 32-bit PCM and 32-bit IEEE float.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_FORMAT_PCM = 1
_FORMAT_IEEE_FLOAT = 3
_FORMAT_EXTENSIBLE = 0xFFFE

# (format code, bits per sample) -> numpy dtype for the raw frames
_SUPPORTED = {
    (_FORMAT_PCM, 16): np.dtype("<i2"),
    (_FORMAT_PCM, 32): np.dtype("<i4"),
    (_FORMAT_IEEE_FLOAT, 32): np.dtype("<f4"),
}


@dataclass(frozen=True)
class WavInfo:
    """Header facts for a WAV file, read without decoding the sample data."""

    rate: int
    n_samples: int
    n_channels: int
    format_code: int
    bits_per_sample: int

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate


@dataclass(frozen=True)
class AudioRecording:
    """A mono recording: float64 samples in [-1, 1] at an integer sample rate."""

    samples: np.ndarray
    rate: int
    path: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.samples.ndim != 1:
            raise ValueError("samples must be a 1-D array")
        if self.rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.rate}")

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate


def _scan_chunks(raw: bytes, path: str) -> dict[str, tuple[int, int]]:
    """Map chunk id -> (offset, size) for the top-level chunks of a RIFF file."""
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a RIFF/WAVE file")
    chunks: dict[str, tuple[int, int]] = {}
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos:pos + 4].decode("latin-1")
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        if cid not in chunks:
            chunks[cid] = (pos + 8, size)
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    return chunks


def _parse_fmt(raw: bytes, off: int, size: int, path: str) -> tuple[int, int, int, int]:
    """Return (format_code, n_channels, rate, bits_per_sample) from a fmt chunk."""
    if size < 16:
        raise ValueError(f"{path}: fmt chunk too short ({size} bytes)")
    fmt, n_channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", raw, off)
    if fmt == _FORMAT_EXTENSIBLE:
        if size < 40:
            raise ValueError(f"{path}: extensible fmt chunk too short ({size} bytes)")
        # actual code is the first two bytes of the SubFormat GUID
        (fmt,) = struct.unpack_from("<H", raw, off + 24)
    return fmt, n_channels, rate, bits


def _read_header(raw: bytes, path: str):
    chunks = _scan_chunks(raw, path)
    if "fmt " not in chunks:
        raise ValueError(f"{path}: missing fmt chunk")
    if "data" not in chunks:
        raise ValueError(f"{path}: missing data chunk")
    fmt, n_channels, rate, bits = _parse_fmt(raw, *chunks["fmt "], path)
    if (fmt, bits) not in _SUPPORTED:
        raise ValueError(
            f"{path}: unsupported encoding (format code {fmt}, {bits}-bit); "
            f"supported: 16-bit PCM, 32-bit PCM, 32-bit IEEE float"
        )
    if n_channels < 1:
        raise ValueError(f"{path}: channel count {n_channels} is invalid")
    if rate <= 0:
        raise ValueError(f"{path}: sample rate {rate} is invalid")
    data_off, data_size = chunks["data"]
    if data_off + data_size > len(raw):
        raise ValueError(
            f"{path}: data chunk truncated (declares {data_size} bytes, "
            f"{len(raw) - data_off} available)"
        )
    block = (bits // 8) * n_channels
    if data_size % block != 0:
        raise ValueError(f"{path}: data chunk length {data_size} is not a whole number of frames")
    return fmt, n_channels, rate, bits, data_off, data_size


def wav_info(path: str | Path) -> WavInfo:
    """Read a WAV header and report rate/length/encoding without decoding samples."""
    p = str(path)
    raw = Path(path).read_bytes()
    fmt, n_channels, rate, bits, _, data_size = _read_header(raw, p)
    n_samples = data_size // ((bits // 8) * n_channels)
    return WavInfo(rate=rate, n_samples=n_samples, n_channels=n_channels,
                   format_code=fmt, bits_per_sample=bits)


def load_wav(path: str | Path, channel: int = 0) -> AudioRecording:
    """Load one channel of a WAV file as float64 samples in [-1, 1].

    Integer PCM samples are scaled by 1 / 2**(bits - 1); IEEE float samples are
    taken as stored. Raises ValueError for unsupported encodings (naming the
    format code found), truncated data, or an out-of-range channel index.
    """
    p = str(path)
    raw = Path(path).read_bytes()
    fmt, n_channels, rate, bits, data_off, data_size = _read_header(raw, p)
    if not 0 <= channel < n_channels:
        raise ValueError(f"{p}: channel {channel} out of range (file has {n_channels})")
    dtype = _SUPPORTED[(fmt, bits)]
    frames = np.frombuffer(raw, dtype=dtype, count=data_size // dtype.itemsize, offset=data_off)
    if n_channels > 1:
        frames = frames.reshape(-1, n_channels)[:, channel]
    samples = frames.astype(np.float64)
    if fmt == _FORMAT_PCM:
        samples /= float(2 ** (bits - 1))
    return AudioRecording(samples=samples, rate=rate, path=p)


def write_wav(path: str | Path, recording: AudioRecording, encoding: str = "pcm16") -> None:
    """Write a mono recording as a WAV file ('pcm16', 'pcm32' or 'float32').

    Integer encodings scale by 2**(bits - 1) and clip to the representable
    range, so writing then reloading reproduces loaded PCM samples exactly.
    """
    x = np.asarray(recording.samples, dtype=np.float64)
    if encoding == "pcm16":
        fmt, bits = _FORMAT_PCM, 16
        data = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2").tobytes()
    elif encoding == "pcm32":
        fmt, bits = _FORMAT_PCM, 32
        data = np.clip(np.rint(x * 2147483648.0), -(2 ** 31), 2 ** 31 - 1).astype("<i4").tobytes()
    elif encoding == "float32":
        fmt, bits = _FORMAT_IEEE_FLOAT, 32
        data = x.astype("<f4").tobytes()
    else:
        raise ValueError(f"unknown encoding {encoding!r}; use pcm16, pcm32 or float32")
    block = bits // 8
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 36 + len(data)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, fmt, 1, recording.rate,
                    recording.rate * block, block, bits),
        b"data",
        struct.pack("<I", len(data)),
    ])
    Path(path).write_bytes(header + data)


def resample(recording: AudioRecording, target_rate: int) -> AudioRecording:
    """Resample to target_rate in the frequency domain.

    The spectrum is zero-padded (upsampling) or truncated (downsampling) and
    inverted, with the Nyquist bin split or folded so real energy is preserved.
    Output length is round(n * target_rate / rate). When the rates already
    match the recording is returned unchanged.
    """
    if target_rate <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate}")
    if target_rate == recording.rate:
        return recording
    n_in = recording.n_samples
    n_out = int(round(n_in * target_rate / recording.rate))
    if n_in == 0 or n_out == 0:
        return AudioRecording(samples=np.zeros(n_out), rate=target_rate, path=recording.path)
    spec = np.fft.rfft(recording.samples)
    out_spec = np.zeros(n_out // 2 + 1, dtype=complex)
    m = min(spec.shape[0], out_spec.shape[0])
    out_spec[:m] = spec[:m]
    if n_out < n_in:
        if n_out % 2 == 0:
            # the new Nyquist bin absorbs its conjugate mirror
            out_spec[-1] = 2.0 * out_spec[-1].real
    else:
        if n_in % 2 == 0:
            # the old Nyquist bin becomes an interior bin; split its energy
            out_spec[n_in // 2] *= 0.5
    samples = np.fft.irfft(out_spec, n_out) * (n_out / n_in)
    return AudioRecording(samples=samples, rate=target_rate, path=recording.path)
