"""Multispectral palmprint datasets: image I/O, synthetic generation, splits.

On-disk layout::

    <root>/<person_id>/<sample_index>_<spectrum>.<ext>

with ``spectrum`` one of ``blue``, ``green``, ``red``, ``nir``. Binary 8-bit
PGM (P5) is always supported; ASCII PGM (P2) is read as well, and any other
extension is handed to Pillow when it is installed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionNotMultipleOf16,
    InvalidDimensions,
    InvalidParameter,
    InvalidSplit,
    MissingSpectrum,
    RaggedDataset,
    UnsupportedFormat,
)

BLOCK = 16
SPECTRA = ("blue", "green", "red", "nir")

_SAMPLE_RE = re.compile(r"^(\d+)_([A-Za-z]+)\.([A-Za-z0-9]+)$")


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel raster, ``pixels[row, col]`` in float64, values in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise InvalidDimensions(f"expected a non-empty 2-D raster, got shape {px.shape}")
        h, w = px.shape
        if h % BLOCK or w % BLOCK:
            raise DimensionNotMultipleOf16(f"{w}x{h} is not tileable by {BLOCK}x{BLOCK} blocks")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class PalmSample:
    person_id: str
    sample_index: int
    spectra: tuple[GrayImage, ...]

    def __post_init__(self) -> None:
        if len(self.spectra) != len(SPECTRA):
            raise MissingSpectrum(
                f"person {self.person_id} sample {self.sample_index}: "
                f"expected {len(SPECTRA)} spectra, got {len(self.spectra)}"
            )
        shapes = {img.pixels.shape for img in self.spectra}
        if len(shapes) != 1:
            raise InvalidDimensions(
                f"person {self.person_id} sample {self.sample_index}: spectra differ in size {sorted(shapes)}"
            )
        object.__setattr__(self, "spectra", tuple(self.spectra))

    @property
    def key(self) -> tuple[str, int]:
        return (self.person_id, self.sample_index)


@dataclass(frozen=True)
class Dataset:
    samples: tuple[PalmSample, ...]
    persons: int = field(init=False)
    samples_per_person: int = field(init=False)

    def __post_init__(self) -> None:
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        counts: dict[str, set[int]] = {}
        for s in samples:
            seen = counts.setdefault(s.person_id, set())
            if s.sample_index in seen:
                raise RaggedDataset(f"duplicate sample {s.sample_index} for person {s.person_id}")
            seen.add(s.sample_index)
        sizes = {len(v) for v in counts.values()}
        if len(sizes) > 1:
            detail = ", ".join(f"{p}={len(v)}" for p, v in counts.items())
            raise RaggedDataset(f"unequal samples per person: {detail}")
        object.__setattr__(self, "persons", len(counts))
        object.__setattr__(self, "samples_per_person", sizes.pop() if sizes else 0)

    def __len__(self) -> int:
        return len(self.samples)

    def person_ids(self) -> list[str]:
        return list(dict.fromkeys(s.person_id for s in self.samples))


@dataclass(frozen=True)
class SplitSpec:
    """``train_count`` samples per person go to training.

    ``seed=None`` takes the lowest sample indices (FirstN); an integer seed
    permutes each person's samples first (SeededRandom).
    """

    train_count: int
    seed: int | None = None

    @property
    def mode(self) -> str:
        return "first_n" if self.seed is None else "seeded_random"


# ---------------------------------------------------------------------------
# image I/O


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise UnsupportedFormat("truncated PGM header")
        if data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _read_pgm(data: bytes) -> np.ndarray:
    tokens, pos = _pgm_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P2"):
        raise UnsupportedFormat(f"not a grayscale PGM (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise UnsupportedFormat("malformed PGM header") from exc
    if width <= 0 or height <= 0:
        raise InvalidDimensions(f"bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormat(f"only 8-bit PGM with maxval 255 is supported, got {maxval}")
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        raster = data[pos + 1 : pos + 1 + width * height]
        if len(raster) != width * height:
            raise UnsupportedFormat("truncated PGM raster")
        arr = np.frombuffer(raster, dtype=np.uint8)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise UnsupportedFormat("truncated PGM raster")
        arr = np.array([int(v) for v in values[: width * height]])
        if arr.min() < 0 or arr.max() > maxval:
            raise UnsupportedFormat("PGM sample out of range")
    return arr.reshape(height, width).astype(np.float64)


def _read_with_pillow(path: Path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:
        raise UnsupportedFormat(f"{path.suffix} images need Pillow (pip install palmid[images])") from exc
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "P", "1"):
                raise UnsupportedFormat(f"{path}: expected a grayscale image, got mode {im.mode}")
            return np.asarray(im.convert("L"), dtype=np.float64)
    except OSError as exc:
        raise UnsupportedFormat(f"{path}: {exc}") from exc


def load_image(path: str | Path) -> GrayImage:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        pixels = _read_pgm(path.read_bytes())
    else:
        pixels = _read_with_pillow(path)
    return GrayImage(pixels)


def save_image(image: GrayImage, path: str | Path) -> None:
    """Write ``image`` as binary PGM, rounding to the nearest 8-bit level."""
    px = np.clip(np.rint(image.pixels), 0, 255).astype(np.uint8)
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + px.tobytes())


def _natural_key(label: str) -> tuple:
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", label))


def load_dataset(root: str | Path) -> Dataset:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(root)
    samples: list[PalmSample] = []
    for person_dir in sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: _natural_key(p.name)):
        found: dict[int, dict[str, Path]] = {}
        for f in person_dir.iterdir():
            m = _SAMPLE_RE.match(f.name)
            if not m or m.group(2).lower() not in SPECTRA:
                continue
            found.setdefault(int(m.group(1)), {})[m.group(2).lower()] = f
        for index in sorted(found):
            files = found[index]
            missing = [s for s in SPECTRA if s not in files]
            if missing:
                raise MissingSpectrum(f"{person_dir.name}/{index}: missing {', '.join(missing)}")
            images = tuple(load_image(files[s]) for s in SPECTRA)
            samples.append(PalmSample(person_dir.name, index, images))
    if not samples:
        raise RaggedDataset(f"no samples found under {root}")
    return Dataset(tuple(samples))


def save_dataset(dataset: Dataset, root: str | Path) -> None:
    root = Path(root)
    width = len(str(max(dataset.samples_per_person - 1, 1)))
    width = max(width, 2)
    for s in dataset.samples:
        d = root / s.person_id
        d.mkdir(parents=True, exist_ok=True)
        for name, img in zip(SPECTRA, s.spectra):
            save_image(img, d / f"{s.sample_index:0{width}d}_{name}.pgm")


# ---------------------------------------------------------------------------
# synthetic data


def _prototype(rng: np.random.Generator, width: int, height: int, terms: int = 8) -> np.ndarray:
    # smooth field: sum of cosines with up to ~6 cycles per image side
    y = np.arange(height)[:, None] / height
    x = np.arange(width)[None, :] / width
    field_ = np.zeros((height, width))
    for _ in range(terms):
        fy, fx = rng.uniform(0.0, 6.0, size=2)
        phase = rng.uniform(0.0, 2 * np.pi)
        amp = rng.uniform(0.5, 1.0)
        field_ += amp * np.cos(2 * np.pi * (fy * y + fx * x) + phase)
    lo, hi = field_.min(), field_.max()
    if hi - lo < 1e-12:
        return np.full((height, width), 127.5)
    return (field_ - lo) * (255.0 / (hi - lo))


def generate_synthetic(
    persons: int = 50,
    samples_per_person: int = 12,
    width: int = 128,
    height: int = 128,
    noise_sigma: float = 8.0,
    seed: int = 42,
) -> Dataset:
    """Seeded stand-in for a multispectral palm database.

    Every (person, spectrum) pair gets a smooth prototype image; each sample
    adds i.i.d. Gaussian noise and clamps to [0, 255]. Each random stream is
    keyed by ``seed`` plus its person/spectrum/sample coordinates, so the
    output is a pure function of the arguments.
    """
    if persons < 2:
        raise InvalidParameter(f"need at least 2 persons, got {persons}")
    if samples_per_person < 1:
        raise InvalidParameter("samples_per_person must be positive")
    if noise_sigma < 0 or not np.isfinite(noise_sigma):
        raise InvalidParameter(f"noise_sigma must be a finite non-negative number, got {noise_sigma}")
    if width <= 0 or height <= 0 or width % BLOCK or height % BLOCK:
        raise InvalidDimensions(f"{width}x{height} must be positive multiples of {BLOCK}")
    if seed < 0:
        raise InvalidParameter("seed must be non-negative")

    label_width = max(len(str(persons - 1)), 3)
    samples = []
    for p in range(persons):
        protos = [
            _prototype(np.random.default_rng([seed, 0, p, s]), width, height) for s in range(len(SPECTRA))
        ]
        for i in range(samples_per_person):
            rng = np.random.default_rng([seed, 1, p, i])
            images = []
            for proto in protos:
                noisy = proto + rng.normal(0.0, noise_sigma, size=proto.shape) if noise_sigma > 0 else proto
                images.append(GrayImage(np.clip(noisy, 0.0, 255.0)))
            samples.append(PalmSample(f"{p:0{label_width}d}", i, tuple(images)))
    return Dataset(tuple(samples))


# ---------------------------------------------------------------------------
# splitting


def split(dataset: Dataset, spec: SplitSpec) -> tuple[list[PalmSample], list[PalmSample]]:
    n = dataset.samples_per_person
    if not 1 <= spec.train_count < n:
        raise InvalidSplit(f"train_count must be in [1, {n - 1}], got {spec.train_count}")
    by_person: dict[str, list[PalmSample]] = {}
    for s in dataset.samples:
        by_person.setdefault(s.person_id, []).append(s)

    train: list[PalmSample] = []
    test: list[PalmSample] = []
    for order, person in enumerate(by_person):
        group = sorted(by_person[person], key=lambda s: s.sample_index)
        if spec.seed is not None:
            perm = np.random.default_rng([spec.seed, order]).permutation(len(group))
            group = [group[i] for i in perm]
        chosen = {s.sample_index for s in group[: spec.train_count]}
        for s in sorted(group, key=lambda s: s.sample_index):
            (train if s.sample_index in chosen else test).append(s)
    return train, test


def parse_fraction(text: str) -> tuple[int, int]:
    """``"4/12"`` -> ``(4, 12)``."""
    try:
        a, b = (int(t) for t in text.strip().split("/"))
    except ValueError as exc:
        raise InvalidParameter(f"bad split fraction {text!r}, expected a/b") from exc
    if a < 1 or b <= a:
        raise InvalidParameter(f"bad split fraction {text!r}")
    return a, b


def stack_spectra(samples: Iterable[PalmSample]) -> np.ndarray:
    """Pixels of ``samples`` as an array of shape (n, spectra, height, width)."""
    return np.stack([np.stack([img.pixels for img in s.spectra]) for s in samples])


def labels(samples: Sequence[PalmSample]) -> list[str]:
    return [s.person_id for s in samples]
