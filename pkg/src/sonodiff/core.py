"""Shared numeric types and per-sample normalization.

Images are plain 2-D float32 numpy arrays (row-major, dimensionless
intensity). Normalization statistics are always taken from the low-quality
observation and applied to both members of a pair: at inference time the
clean target is unknown, so only the observation's statistics are available
for mapping the restored image back to intensity units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS_NORM = 1e-6  # std floor guarding constant-image division


def as_image(data, copy: bool = False) -> np.ndarray:
    """Validate and return a 2-D float32 image (finite, nonempty)."""
    img = np.array(data, dtype=np.float32, copy=copy) if copy else np.asarray(
        data, dtype=np.float32
    )
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must be at least 1x1, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    return img


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class NormRecord:
    """Mean/std pair used to normalize and later denormalize a sample."""

    mean: float
    std: float

    def __post_init__(self):
        if not np.isfinite(self.mean) or not np.isfinite(self.std):
            raise ValueError("NormRecord fields must be finite")
        if self.std < EPS_NORM:
            raise ValueError(f"NormRecord.std must be >= {EPS_NORM}")


@dataclass
class PairedSample:
    """A clean target with its speckled observation (plus bookkeeping)."""

    x0: np.ndarray
    mu: np.ndarray
    rec: NormRecord | None = None
    probe: str = ""
    seed: int = 0
    sample_id: str = ""

    def __post_init__(self):
        check_same_shape(self.x0, self.mu)


def image_stats(img: np.ndarray) -> tuple[float, float]:
    """Mean and population std of an image, accumulated in float64."""
    x = np.asarray(img, dtype=np.float64)
    return float(x.mean()), float(x.std())


def normalize_pair(
    x0: np.ndarray, mu: np.ndarray
) -> tuple[np.ndarray, np.ndarray, NormRecord]:
    """Normalize a pair to the observation's zero-mean/unit-std frame.

    The record holds mu's statistics; both images are mapped with them.
    A constant mu is not an error: its std is clamped to ``EPS_NORM``.
    """
    x0 = as_image(x0)
    mu = as_image(mu)
    check_same_shape(x0, mu)
    mean, std = image_stats(mu)
    rec = NormRecord(mean=mean, std=max(std, EPS_NORM))
    x0n = ((x0.astype(np.float64) - rec.mean) / rec.std).astype(np.float32)
    mun = ((mu.astype(np.float64) - rec.mean) / rec.std).astype(np.float32)
    return x0n, mun, rec


def denormalize(img: np.ndarray, rec: NormRecord) -> np.ndarray:
    """Invert :func:`normalize_pair`: img * std + mean."""
    img = as_image(img)
    out = img.astype(np.float64) * rec.std + rec.mean
    return out.astype(np.float32)
