"""Pipeline configuration: JSON round-tripping with strict key checking.

Absent keys take their defaults; unknown keys are rejected with the full key
path so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .annotations import GoldAdapter
from .detect import DetectionConfig
from .enhance import EnhanceConfig
from .spectrogram import SpectrogramParams


@dataclass(frozen=True)
class PipelineConfig:
    """Everything that shapes a detection run, in one serializable object."""

    channel: int = 0
    spectrogram: SpectrogramParams = field(default_factory=SpectrogramParams)
    enhancement: EnhanceConfig = field(default_factory=EnhanceConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    adapters: dict[str, GoldAdapter] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.channel < 0:
            raise ValueError(f"channel must be >= 0, got {self.channel}")


def _check_keys(section: dict, allowed: set[str], path: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        name = sorted(unknown)[0]
        where = f"{path}.{name}" if path else name
        raise ValueError(f"unknown config key {where!r}")


def _build(cls, section: Any, path: str, fields: dict[str, type]):
    if not isinstance(section, dict):
        raise ValueError(f"config section {path!r} must be an object")
    _check_keys(section, set(fields), path)
    kwargs = {}
    for name, conv in fields.items():
        if name in section:
            kwargs[name] = conv(section[name]) if conv is not None else section[name]
    return cls(**kwargs)


def _pair(value: Any) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValueError(f"expected a pair of integers, got {value!r}")
    return int(value[0]), int(value[1])


def config_from_dict(data: dict) -> PipelineConfig:
    """Build a PipelineConfig from parsed JSON, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ValueError("config root must be a JSON object")
    _check_keys(data, {"channel", "spectrogram", "enhancement", "detection", "adapters"}, "")
    spectrogram = _build(SpectrogramParams, data.get("spectrogram", {}), "spectrogram", {
        "window_size": int, "hop": int, "canonical_rate": int,
        "band_low_hz": float, "band_high_hz": float,
        "window_function": str, "magnitude_scale": str,
    })
    enhancement = _build(EnhanceConfig, data.get("enhancement", {}), "enhancement", {
        "median_kernel": int, "clahe_clip_limit": float,
        "clahe_tiles": _pair, "close_kernel": _pair,
    })
    detection = _build(DetectionConfig, data.get("detection", {}), "detection", {
        "min_duration_s": float, "min_bandwidth_hz": float, "merge_gap_s": float,
    })
    adapters = {}
    adapter_section = data.get("adapters", {})
    if not isinstance(adapter_section, dict):
        raise ValueError("config section 'adapters' must be an object")
    for name, spec in adapter_section.items():
        adapters[name] = _build(GoldAdapter, spec, f"adapters.{name}", {
            "start_column": None, "end_column": None,
            "low_column": None, "high_column": None,
            "delimiter": str, "has_header": bool,
        })
    return PipelineConfig(
        channel=int(data.get("channel", 0)),
        spectrogram=spectrogram,
        enhancement=enhancement,
        detection=detection,
        adapters=adapters,
    )


def config_to_dict(config: PipelineConfig) -> dict:
    """Serialize a PipelineConfig to plain JSON-ready data."""
    s = config.spectrogram
    e = config.enhancement
    d = config.detection
    return {
        "channel": config.channel,
        "spectrogram": {
            "window_size": s.window_size,
            "hop": s.hop,
            "canonical_rate": s.canonical_rate,
            "band_low_hz": s.band_low_hz,
            "band_high_hz": s.band_high_hz,
            "window_function": s.window_function,
            "magnitude_scale": s.magnitude_scale,
        },
        "enhancement": {
            "median_kernel": e.median_kernel,
            "clahe_clip_limit": e.clahe_clip_limit,
            "clahe_tiles": list(e.clahe_tiles),
            "close_kernel": list(e.close_kernel),
        },
        "detection": {
            "min_duration_s": d.min_duration_s,
            "min_bandwidth_hz": d.min_bandwidth_hz,
            "merge_gap_s": d.merge_gap_s,
        },
        "adapters": {name: a.to_dict() for name, a in sorted(config.adapters.items())},
    }


def load_config(path: str | Path) -> PipelineConfig:
    """Load a config from a JSON file (strict keys, defaults for absences)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    try:
        return config_from_dict(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def save_config(config: PipelineConfig, path: str | Path) -> None:
    """Write a config as pretty-printed JSON (LF, trailing newline)."""
    text = json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def config_hash(config: PipelineConfig) -> str:
    """Stable SHA-256 of the canonical JSON serialization."""
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
