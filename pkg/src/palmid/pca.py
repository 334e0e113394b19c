"""Principal component analysis on the unnormalized scatter matrix.

The scatter ``C = sum_i z_i z_i^T`` of the mean-removed vectors is
diagonalized directly, so a model always carries a full orthonormal basis
of ``d`` components (those past the data rank have eigenvalue 0). This
makes projection onto all ``d`` components an exact rotation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSpectrum, KOutOfRange, LengthMismatch, NumericalError, TooFewSamples

FORMAT_VERSION = 1
CLAMP_RATIO = 1e-12


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (n_components, d); row k is the k-th eigenvector
    eigenvalues: np.ndarray

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude coordinate is positive."""
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(vectors.shape[0]), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def scatter_matrix(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(vectors, dtype=np.float64)
    mean = x.mean(axis=0)
    z = x - mean
    return mean, z.T @ z


def pca_fit(vectors: np.ndarray) -> PcaModel:
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise LengthMismatch(f"expected an (N, d) array of vectors, got shape {x.shape}")
    if x.shape[0] < 2:
        raise TooFewSamples(f"PCA needs at least 2 vectors, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise NumericalError("non-finite values in PCA input")
    mean, c = scatter_matrix(x)
    try:
        vals, vecs = np.linalg.eigh(c)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = vecs[:, order].T
    top = vals[0] if vals.size else 0.0
    vals = np.where(vals < CLAMP_RATIO * top, 0.0, vals) if top > 0 else np.zeros_like(vals)
    return PcaModel(mean, _canonical_signs(vecs), vals)


def _check_k(model: PcaModel, k: int) -> None:
    if not 1 <= k <= model.n_components:
        raise KOutOfRange(f"k must be in [1, {model.n_components}], got {k}")


def pca_project(model: PcaModel, v: np.ndarray, k: int) -> np.ndarray:
    """Coordinates of ``v - mean`` on the first ``k`` components.

    ``v`` may be one vector or an array of row vectors.
    """
    _check_k(model, k)
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape[-1] != model.d:
        raise LengthMismatch(f"vector length {arr.shape[-1]} != model dimension {model.d}")
    return (arr - model.mean) @ model.components[:k].T


def pca_reconstruct(model: PcaModel, coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.float64)
    k = coords.shape[-1]
    _check_k(model, k)
    return model.mean + coords @ model.components[:k]


def retained_energy(model: PcaModel, k: int) -> float:
    _check_k(model, k)
    total = float(np.sum(model.eigenvalues))
    if total <= 0:
        raise DegenerateSpectrum("all eigenvalues are zero")
    return float(np.sum(model.eigenvalues[:k])) / total


def save_model(model: PcaModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        np.savez(
            fh,
            version=np.array(FORMAT_VERSION),
            mean=model.mean,
            components=model.components,
            eigenvalues=model.eigenvalues,
        )


def load_model(path: str | Path) -> PcaModel:
    with np.load(path, allow_pickle=False) as data:
        version = int(data["version"])
        if version != FORMAT_VERSION:
            raise NumericalError(f"unsupported PCA model format version {version}")
        return PcaModel(data["mean"].copy(), data["components"].copy(), data["eigenvalues"].copy())
