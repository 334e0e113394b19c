"""Block feature extraction and feature standardization.

Each 16x16 block yields ``dct_count`` zig-zag DCT coefficients followed by
the 9 detail-band wavelet energies. Per image these columns form an
``18 x M`` matrix (for the default ``dct_count=9``); the flattened vector
concatenates the columns block by block, so feature ``m * 18 + r`` is row
``r`` of block ``m``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import BLOCK, SPECTRA, GrayImage, PalmSample
from .errors import DimensionNotMultipleOf16, LengthMismatch, TooFewSamples
from .transforms import dct2, dwt2_db2, subband_energies, zigzag_take

WAVELET_FEATURES = 9


def features_per_block(dct_count: int = 9) -> int:
    return dct_count + WAVELET_FEATURES


def _tile(pixels: np.ndarray) -> np.ndarray:
    """(..., H, W) -> (..., H/16 * W/16, 16, 16) in row-major block order."""
    *lead, h, w = pixels.shape
    if h % BLOCK or w % BLOCK:
        raise DimensionNotMultipleOf16(f"{w}x{h} is not tileable by {BLOCK}x{BLOCK} blocks")
    tiles = pixels.reshape(*lead, h // BLOCK, BLOCK, w // BLOCK, BLOCK)
    tiles = np.swapaxes(tiles, -3, -2)
    return tiles.reshape(*lead, (h // BLOCK) * (w // BLOCK), BLOCK, BLOCK)


def block_partition(image: GrayImage) -> list[np.ndarray]:
    return list(_tile(image.pixels))


def block_features(block: np.ndarray, dct_count: int = 9) -> np.ndarray:
    """Feature vector of one block, or of each block in a ``(..., 16, 16)`` stack."""
    dct = zigzag_take(dct2(block), dct_count)
    wav = subband_energies(dwt2_db2(block))
    return np.concatenate([dct, wav], axis=-1)


def image_features(image: GrayImage, dct_count: int = 9) -> np.ndarray:
    """Feature matrix F with one column per block, shape ``(dct_count + 9, M)``."""
    return block_features(_tile(image.pixels), dct_count).T


def flatten(matrix: np.ndarray) -> np.ndarray:
    """Column-by-column flattening of a feature matrix."""
    return np.asarray(matrix).T.reshape(-1)


def unflatten(vector: np.ndarray, dct_count: int = 9) -> np.ndarray:
    rows = features_per_block(dct_count)
    v = np.asarray(vector)
    if v.shape[-1] % rows:
        raise LengthMismatch(f"length {v.shape[-1]} is not a multiple of {rows}")
    return v.reshape(-1, rows).T


def pixel_stack_features(pixels: np.ndarray, dct_count: int = 9) -> np.ndarray:
    """Flattened features for an array of images shaped ``(..., H, W)``.

    Returns ``(..., D)``; equivalent to ``flatten(image_features(img))`` on
    each image but batched over every block at once.
    """
    feats = block_features(_tile(np.asarray(pixels, dtype=np.float64)), dct_count)
    return feats.reshape(*feats.shape[:-2], -1)


def sample_features(samples: Sequence[PalmSample], dct_count: int = 9, chunk: int = 64) -> np.ndarray:
    """Features of every spectrum of every sample, shape ``(n, spectra, D)``."""
    out = []
    for start in range(0, len(samples), chunk):
        part = samples[start : start + chunk]
        px = np.stack([np.stack([img.pixels for img in s.spectra]) for s in part])
        out.append(pixel_stack_features(px, dct_count))
    if not out:
        raise TooFewSamples("no samples to extract features from")
    return np.concatenate(out, axis=0)


# ---------------------------------------------------------------------------
# standardization


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stddevs: np.ndarray

    def __len__(self) -> int:
        return self.means.shape[0]


def fit_standardizer(training_features: Sequence[np.ndarray] | np.ndarray) -> Standardizer:
    """Per-coordinate mean and population standard deviation."""
    try:
        x = np.asarray(training_features, dtype=np.float64)
    except ValueError as exc:
        raise LengthMismatch("training vectors differ in length") from exc
    if x.ndim != 2:
        raise LengthMismatch(f"expected a list of equal-length vectors, got shape {x.shape}")
    if x.shape[0] < 2:
        raise TooFewSamples(f"need at least 2 training vectors, got {x.shape[0]}")
    means = x.mean(axis=0)
    stddevs = np.sqrt(np.mean((x - means) ** 2, axis=0))
    return Standardizer(means, stddevs)


def apply_standardizer(s: Standardizer, v: np.ndarray) -> np.ndarray:
    """Standardize ``v`` (one vector or rows of vectors); zero-variance coordinates map to 0."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape[-1] != len(s):
        raise LengthMismatch(f"vector length {arr.shape[-1]} != standardizer length {len(s)}")
    safe = np.where(s.stddevs > 0, s.stddevs, 1.0)
    return np.where(s.stddevs > 0, (arr - s.means) / safe, 0.0)


# ---------------------------------------------------------------------------
# CSV serialization


def write_feature_csv(
    path: str | Path,
    samples: Sequence[PalmSample],
    features: np.ndarray,
    spectra: Iterable[str] = SPECTRA,
) -> None:
    """One row per (sample, spectrum): ``person_id,sample_index,spectrum,f_0001..``."""
    spectra = tuple(spectra)
    n, s, d = features.shape
    if n != len(samples) or s != len(spectra):
        raise LengthMismatch("feature array does not match samples/spectra")
    width = max(4, len(str(d)))
    header = ["person_id", "sample_index", "spectrum"] + [f"f_{i:0{width}d}" for i in range(1, d + 1)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for sample, row in zip(samples, features):
            for name, vec in zip(spectra, row):
                w.writerow([sample.person_id, sample.sample_index, name] + [repr(float(x)) for x in vec])


def read_feature_csv(path: str | Path) -> tuple[list[tuple[str, int, str]], np.ndarray]:
    """Inverse of :func:`write_feature_csv`: row keys and a ``(rows, D)`` array."""
    keys = []
    values = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        d = len(header) - 3
        for row in r:
            if len(row) != d + 3:
                raise LengthMismatch(f"row has {len(row)} fields, expected {d + 3}")
            keys.append((row[0], int(row[1]), row[2]))
            values.append([float(x) for x in row[3:]])
    return keys, np.asarray(values, dtype=np.float64).reshape(len(keys), d)
