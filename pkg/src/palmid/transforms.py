"""16x16 block transforms: orthonormal 2D DCT-II, zig-zag scan, periodic db2 DWT.

Every function accepts either a single ``(16, 16)`` block or a stack of
blocks with shape ``(..., 16, 16)``; the leading axes are carried through.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CountOutOfRange, UnsupportedDepth, WrongBlockSize

BLOCK = 16
LEVELS = 3

_S3 = np.sqrt(3.0)
DB2_LOW = np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * np.sqrt(2.0))
# g_k = (-1)^k h_{3-k}
DB2_HIGH = np.array([(-1) ** k * DB2_LOW[3 - k] for k in range(4)])

BAND_NAMES = tuple(f"L{lvl}-{b}" for lvl in range(1, LEVELS + 1) for b in ("LH", "HL", "HH"))


def _check_block(block: np.ndarray) -> np.ndarray:
    arr = np.asarray(block, dtype=np.float64)
    if arr.ndim < 2 or arr.shape[-2:] != (BLOCK, BLOCK):
        raise WrongBlockSize(f"expected trailing shape ({BLOCK}, {BLOCK}), got {arr.shape}")
    return arr


@lru_cache(maxsize=None)
def dct_matrix(n: int = BLOCK) -> np.ndarray:
    """Orthonormal DCT-II basis ``C[u, m] = alpha_u cos(pi (2m+1) u / 2n)``."""
    m = np.arange(n)
    u = m[:, None]
    c = np.cos(np.pi * (2 * m[None, :] + 1) * u / (2 * n))
    alpha = np.full(n, np.sqrt(2.0 / n))
    alpha[0] = np.sqrt(1.0 / n)
    mat = alpha[:, None] * c
    mat.setflags(write=False)
    return mat


def dct2(block: np.ndarray) -> np.ndarray:
    """2D DCT-II with orthonormal scaling, ``F = C f C^T``."""
    f = _check_block(block)
    c = dct_matrix(BLOCK)
    return c @ f @ c.T


def idct2(coeffs: np.ndarray) -> np.ndarray:
    f = _check_block(coeffs)
    c = dct_matrix(BLOCK)
    return c.T @ f @ c


@lru_cache(maxsize=None)
def zigzag_indices(n: int = BLOCK) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the JPEG zig-zag scan of an ``n x n`` grid.

    Anti-diagonals are visited in order; odd diagonals run top-right to
    bottom-left, even ones bottom-left to top-right.
    """
    cells = [(r, c) for r in range(n) for c in range(n)]
    cells.sort(key=lambda rc: (rc[0] + rc[1], rc[0] if (rc[0] + rc[1]) % 2 else -rc[0]))
    rows = np.array([r for r, _ in cells])
    cols = np.array([c for _, c in cells])
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def zigzag_take(coeffs: np.ndarray, count: int = 9) -> np.ndarray:
    arr = _check_block(coeffs)
    if not 1 <= count <= BLOCK * BLOCK:
        raise CountOutOfRange(f"count must be in [1, {BLOCK * BLOCK}], got {count}")
    rows, cols = zigzag_indices(BLOCK)
    return arr[..., rows[:count], cols[:count]]


# ---------------------------------------------------------------------------
# wavelet


@lru_cache(maxsize=None)
def _analysis_matrices(length: int) -> tuple[np.ndarray, np.ndarray]:
    """Periodic db2 analysis operators of shape (length/2, length).

    Row ``n`` computes ``y[n] = sum_k h[k] x[(2n + k) mod length]``. Together
    the two matrices form an orthogonal ``length x length`` operator.
    """
    half = length // 2
    lo = np.zeros((half, length))
    hi = np.zeros((half, length))
    for n in range(half):
        for k in range(4):
            lo[n, (2 * n + k) % length] += DB2_LOW[k]
            hi[n, (2 * n + k) % length] += DB2_HIGH[k]
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


@dataclass(frozen=True)
class SubbandPyramid:
    """Detail bands per level, finest first, plus the final approximation.

    ``details[i]`` is ``(LH, HL, HH)`` for level ``i + 1``. LH is low-pass
    along rows and high-pass along columns (horizontal edges), HL the reverse.
    """

    details: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]
    final_ll: np.ndarray

    def bands(self) -> list[np.ndarray]:
        out = [band for level in self.details for band in level]
        out.append(self.final_ll)
        return out


def dwt2_db2(block: np.ndarray, levels: int = LEVELS) -> SubbandPyramid:
    """Three-level separable db2 decomposition with periodic extension."""
    x = _check_block(block)
    if levels != LEVELS:
        raise UnsupportedDepth(f"only {LEVELS}-level decomposition of {BLOCK}x{BLOCK} blocks is supported")
    details = []
    ll = x
    for _ in range(levels):
        lo, hi = _analysis_matrices(ll.shape[-1])
        row_lo = ll @ lo.T
        row_hi = ll @ hi.T
        details.append((hi @ row_lo, lo @ row_hi, hi @ row_hi))
        ll = lo @ row_lo
    return SubbandPyramid(tuple(details), ll)


def idwt2_db2(pyramid: SubbandPyramid) -> np.ndarray:
    """Inverse of :func:`dwt2_db2`; the analysis operators are orthogonal."""
    ll = pyramid.final_ll
    for lh, hl, hh in reversed(pyramid.details):
        lo, hi = _analysis_matrices(2 * ll.shape[-1])
        row_lo = lo.T @ ll + hi.T @ lh
        row_hi = lo.T @ hl + hi.T @ hh
        ll = row_lo @ lo + row_hi @ hi
    return ll


def subband_energies(pyramid: SubbandPyramid) -> np.ndarray:
    """Sum of squares of the 9 detail bands, ordered as :data:`BAND_NAMES`.

    The final LL band is left out.
    """
    energies = [np.sum(band**2, axis=(-2, -1)) for level in pyramid.details for band in level]
    return np.stack(energies, axis=-1)
