"""Per-dimension cap calibration and the shared 512-bin prosody codec.

Caps are empirical percentiles of corpus samples (linear interpolation),
fixed per dimension:

    duration          0.1 / 99.9
    f0_range          0   / 99.9
    f0_median         0.1 / 99.9
    f0_slope          0.5 / 99.5
    energy            0.1 / 100
    silence_duration  0.1 / 99.9   (calibrated on log silence-gap durations)
    extremity         0   / 100    (calibrated on corpus extremity scores)
    speaker_f0        0   / 99.9   (reuses the f0_range percentiles)

Encoding clips a value to [lower_cap, upper_cap], rescales to [0, 1], and
floors into one of 512 equally spaced bins (top value clamps into bin 511).
Decoding returns the bin center, so the round-trip error for in-cap values is
at most half a bin width. A bin index is a plain int in [0, 512).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import SchemaError

N_BINS = 512

ProsodyToken = int  # bin index in [0, N_BINS)


class Dimension(str, Enum):
    DURATION = "duration"
    F0_RANGE = "f0_range"
    F0_MEDIAN = "f0_median"
    F0_SLOPE = "f0_slope"
    ENERGY = "energy"
    SILENCE = "silence_duration"
    EXTREMITY = "extremity"
    SPEAKER_F0 = "speaker_f0"


WORD_DIMENSIONS = (
    Dimension.DURATION,
    Dimension.F0_RANGE,
    Dimension.F0_MEDIAN,
    Dimension.F0_SLOPE,
    Dimension.ENERGY,
)

CAP_PERCENTILES: dict[Dimension, tuple[float, float]] = {
    Dimension.DURATION: (0.1, 99.9),
    Dimension.F0_RANGE: (0.0, 99.9),
    Dimension.F0_MEDIAN: (0.1, 99.9),
    Dimension.F0_SLOPE: (0.5, 99.5),
    Dimension.ENERGY: (0.1, 100.0),
    Dimension.SILENCE: (0.1, 99.9),
    Dimension.EXTREMITY: (0.0, 100.0),
    Dimension.SPEAKER_F0: (0.0, 99.9),
}


@dataclass(frozen=True)
class DimensionSpec:
    lower_cap: float
    upper_cap: float
    percentiles: tuple[float, float]
    sample_count: int

    def __post_init__(self):
        if not (self.lower_cap < self.upper_cap):
            raise ValueError(f"degenerate dimension: caps [{self.lower_cap}, {self.upper_cap}]")

    @property
    def width(self) -> float:
        return self.upper_cap - self.lower_cap


@dataclass(frozen=True)
class QuantizerSpec:
    """The persisted codec contract: caps per dimension plus bin count."""

    dimensions: dict[Dimension, DimensionSpec]
    bin_count: int = N_BINS

    def __post_init__(self):
        if self.bin_count != N_BINS:
            raise ValueError(f"bin_count must be {N_BINS}")
        for dim in WORD_DIMENSIONS:
            ds = self.dimensions.get(dim)
            if ds is not None and tuple(ds.percentiles) != CAP_PERCENTILES[dim]:
                raise ValueError(
                    f"{dim.value} caps must use percentiles {CAP_PERCENTILES[dim]}, "
                    f"got {tuple(ds.percentiles)}"
                )

    def dim(self, dimension: Dimension) -> DimensionSpec:
        try:
            return self.dimensions[dimension]
        except KeyError:
            raise ValueError(f"dimension not calibrated: {dimension.value}") from None

    def has(self, dimension: Dimension) -> bool:
        return dimension in self.dimensions

    def merged_with(self, other: "QuantizerSpec") -> "QuantizerSpec":
        return QuantizerSpec(dimensions={**self.dimensions, **other.dimensions})

    # -- persistence (floats round-trip bit-exactly through repr) -----------

    def to_json(self) -> str:
        doc = {
            "bin_count": self.bin_count,
            "dimensions": {
                dim.value: {
                    "lower_cap": ds.lower_cap,
                    "upper_cap": ds.upper_cap,
                    "percentiles": list(ds.percentiles),
                    "sample_count": ds.sample_count,
                }
                for dim, ds in self.dimensions.items()
            },
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "QuantizerSpec":
        try:
            doc = json.loads(text)
            dims = {
                Dimension(name): DimensionSpec(
                    lower_cap=float(entry["lower_cap"]),
                    upper_cap=float(entry["upper_cap"]),
                    percentiles=(float(entry["percentiles"][0]), float(entry["percentiles"][1])),
                    sample_count=int(entry["sample_count"]),
                )
                for name, entry in doc["dimensions"].items()
            }
            return cls(dimensions=dims, bin_count=int(doc["bin_count"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed quantizer spec: {exc}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "QuantizerSpec":
        return cls.from_json(Path(path).read_text())


def calibrate(
    samples: Mapping[Dimension, "np.typing.ArrayLike"],
    min_samples: int = 1000,
) -> QuantizerSpec:
    """Compute caps for every dimension present in ``samples``.

    Non-finite values are excluded before taking percentiles. Raises
    ValueError on fewer than ``min_samples`` finite values or when all values
    are equal (degenerate dimension).
    """
    dims: dict[Dimension, DimensionSpec] = {}
    for dimension, raw in samples.items():
        values = np.asarray(raw, dtype=np.float64)
        values = values[np.isfinite(values)]
        if values.size < min_samples:
            raise ValueError(
                f"insufficient samples for {dimension.value}: "
                f"{values.size} < {min_samples}"
            )
        lo_pct, hi_pct = CAP_PERCENTILES[dimension]
        lower, upper = np.percentile(values, [lo_pct, hi_pct])
        if not lower < upper:
            raise ValueError(f"degenerate dimension: {dimension.value}")
        dims[dimension] = DimensionSpec(
            lower_cap=float(lower),
            upper_cap=float(upper),
            percentiles=(lo_pct, hi_pct),
            sample_count=int(values.size),
        )
    return QuantizerSpec(dimensions=dims)


def quantize(value: float, dimension: Dimension, spec: QuantizerSpec) -> ProsodyToken:
    """Clip to the caps, rescale to [0, 1], floor into 512 bins."""
    if not math.isfinite(value):
        raise ValueError(f"non-finite value for {dimension.value}")
    ds = spec.dim(dimension)
    x = (value - ds.lower_cap) / ds.width
    x = min(max(x, 0.0), 1.0)
    return min(int(x * N_BINS), N_BINS - 1)


def quantize_array(
    values: "np.typing.ArrayLike", dimension: Dimension, spec: QuantizerSpec
) -> np.ndarray:
    """Vectorized quantize; same formula as the scalar path."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite value for {dimension.value}")
    ds = spec.dim(dimension)
    x = np.clip((arr - ds.lower_cap) / ds.width, 0.0, 1.0)
    return np.minimum(np.floor(x * N_BINS).astype(np.int64), N_BINS - 1)


def dequantize(token: ProsodyToken, dimension: Dimension, spec: QuantizerSpec) -> float:
    """Bin center of ``token`` on the dimension's capped interval."""
    if not 0 <= token < N_BINS:
        raise ValueError(f"bin out of range: {token}")
    ds = spec.dim(dimension)
    return ds.lower_cap + (token + 0.5) / N_BINS * ds.width


def speaker_f0_token(mean_log_f0: float, spec: QuantizerSpec) -> ProsodyToken:
    """Tokenize a speaker's mean log-F0 with the speaker_f0 caps."""
    return quantize(mean_log_f0, Dimension.SPEAKER_F0, spec)


def silence_log_duration(frames: int) -> float:
    """Log silence-gap duration in frames; zero gaps use a half-frame floor
    so the value stays finite."""
    if frames < 0:
        raise ValueError("negative silence duration")
    return float(np.log(max(frames, 0.5)))
