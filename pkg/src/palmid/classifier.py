"""Minimum-distance and per-feature majority-vote identification.

A :class:`Gallery` holds the enrolled training samples as an array of shape
``(entries, spectra, D)``. Probes are ``(spectra, D)`` arrays of the same raw
feature layout; a PCA-mode gallery projects them on the way in.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import BadWeights, DimensionMismatch, EmptyGallery, InvalidParameter
from .pca import PcaModel, pca_project

Method = Literal["min_distance", "majority_vote"]


@dataclass(frozen=True)
class PcaMode:
    models: tuple[PcaModel, ...]  # one per spectrum
    k: int


@dataclass(frozen=True, eq=False)
class Gallery:
    person_ids: tuple[str, ...]
    sample_indices: tuple[int, ...]
    features: np.ndarray  # stored form: raw (n, S, D) or projected (n, S, k)
    feature_dim: int
    pca: PcaMode | None = None

    @classmethod
    def build(
        cls,
        person_ids: Sequence[str],
        sample_indices: Sequence[int],
        features: np.ndarray,
        pca: PcaMode | None = None,
    ) -> "Gallery":
        feats = np.asarray(features, dtype=np.float64)
        if feats.ndim != 3 or feats.shape[0] == 0:
            raise EmptyGallery(f"gallery needs a non-empty (entries, spectra, D) array, got {feats.shape}")
        if not len(person_ids) == len(sample_indices) == feats.shape[0]:
            raise DimensionMismatch("labels and features disagree on the number of entries")
        if pca is not None:
            if len(pca.models) != feats.shape[1]:
                raise DimensionMismatch("need one PCA model per spectrum")
        gallery = cls(tuple(person_ids), tuple(sample_indices), feats, feats.shape[2], pca)
        if pca is not None:
            object.__setattr__(gallery, "features", gallery.prepare(feats))
        gallery.features.setflags(write=False)
        return gallery

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def spectra(self) -> int:
        return self.features.shape[1]

    def prepare(self, probe: np.ndarray) -> np.ndarray:
        """Check a raw ``(..., spectra, D)`` probe and map it to the stored space."""
        p = np.asarray(probe, dtype=np.float64)
        if p.shape[-2:] != (self.spectra, self.feature_dim):
            raise DimensionMismatch(
                f"probe shape {p.shape[-2:]} does not match gallery ({self.spectra}, {self.feature_dim})"
            )
        if self.pca is None:
            return p
        parts = [pca_project(m, p[..., s, :], self.pca.k) for s, m in enumerate(self.pca.models)]
        return np.stack(parts, axis=-2)


def gallery_distances(gallery: Gallery, probe: np.ndarray) -> np.ndarray:
    """Per-entry Euclidean distance to ``probe``, summed over spectra."""
    p = gallery.prepare(probe)
    return np.sqrt(((gallery.features - p) ** 2).sum(axis=-1)).sum(axis=-1)


def min_distance_classify(gallery: Gallery, probe: np.ndarray) -> tuple[str, int]:
    d = gallery_distances(gallery, probe)
    best = int(np.argmin(d))  # first minimum, i.e. lowest index on ties
    return gallery.person_ids[best], best


@dataclass(frozen=True, eq=False)
class Scoreboard:
    scores: np.ndarray
    tiebreak_distances: np.ndarray
    winner: int
    person_ids: tuple[str, ...]

    def ranking(self) -> np.ndarray:
        """Entry indices by score descending, then distance, then index."""
        idx = np.arange(self.scores.shape[0])
        return np.lexsort((idx, self.tiebreak_distances, -self.scores))

    def person_scores(self) -> dict[str, float]:
        pooled: dict[str, float] = {}
        for pid, s in zip(self.person_ids, self.scores):
            pooled[pid] = pooled.get(pid, 0) + s
        return pooled

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["entry_index", "person_id", "score", "tiebreak_distance"])
            for j in self.ranking():
                score = self.scores[j]
                score = int(score) if float(score).is_integer() else repr(float(score))
                w.writerow([int(j), self.person_ids[j], score, repr(float(self.tiebreak_distances[j]))])


def _votes(gallery: Gallery, probe: np.ndarray, granularity: str, block_size: int) -> np.ndarray:
    """Index of the winning entry for every (spectrum, voting unit); shape (S, units)."""
    diff = gallery.features - probe
    if granularity == "scalar":
        dist = np.abs(diff)
    elif granularity == "block":
        n, s, d = diff.shape
        if d % block_size:
            raise DimensionMismatch(f"feature length {d} is not a multiple of block size {block_size}")
        dist = np.sqrt((diff.reshape(n, s, d // block_size, block_size) ** 2).sum(axis=-1))
    else:
        raise ValueError(f"unknown voting granularity {granularity!r}")
    return np.argmin(dist, axis=0)


def majority_vote_classify(
    gallery: Gallery,
    probe: np.ndarray,
    weights: np.ndarray | None = None,
    *,
    pool: Literal["entry", "person"] = "entry",
    granularity: Literal["scalar", "block"] = "scalar",
    block_size: int = 18,
) -> tuple[str, Scoreboard]:
    """Every feature of every spectrum votes for its nearest gallery entry.

    With ``granularity="block"`` each ``block_size``-long column votes by
    Euclidean distance instead of each scalar. ``pool="person"`` sums the
    tallies of each person's entries before picking the winner.
    """
    if gallery.pca is not None:
        raise DimensionMismatch("majority voting runs on raw features, not a PCA gallery")
    p = gallery.prepare(probe)
    if p.ndim != 2:
        raise DimensionMismatch("majority voting takes one probe at a time")
    votes = _votes(gallery, p, granularity, block_size)
    units = votes.shape[1]
    n = len(gallery)

    if weights is None:
        scores = np.bincount(votes.ravel(), minlength=n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (units,):
            raise BadWeights(f"expected {units} weights, got shape {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise BadWeights("weights must be finite and non-negative")
        scores = np.bincount(votes.ravel(), weights=np.tile(w, votes.shape[0]), minlength=n)

    dist = np.sqrt(((gallery.features - p) ** 2).sum(axis=-1)).sum(axis=-1)
    order = np.lexsort((np.arange(n), dist, -scores))
    winner = int(order[0])

    if pool == "person":
        board = Scoreboard(scores, dist, winner, gallery.person_ids)
        pooled = board.person_scores()
        best_dist: dict[str, float] = {}
        for pid, dj in zip(gallery.person_ids, dist):
            best_dist[pid] = min(best_dist.get(pid, np.inf), dj)
        persons = list(pooled)
        best_person = min(persons, key=lambda q: (-pooled[q], best_dist[q], persons.index(q)))
        winner = int(next(j for j in order if gallery.person_ids[j] == best_person))
    elif pool != "entry":
        raise ValueError(f"unknown pooling {pool!r}")

    return gallery.person_ids[winner], Scoreboard(scores, dist, winner, gallery.person_ids)


def predict(gallery: Gallery, probes: np.ndarray, method: Method, **options) -> list[str]:
    if method == "min_distance":
        if options:
            raise TypeError(f"min_distance takes no options, got {sorted(options)}")
        return [min_distance_classify(gallery, p)[0] for p in probes]
    if method == "majority_vote":
        return [majority_vote_classify(gallery, p, **options)[0] for p in probes]
    raise ValueError(f"unknown method {method!r}")


def evaluate(gallery: Gallery, probes: np.ndarray, labels: Sequence[str], method: Method, **options) -> float:
    """Fraction of ``probes`` (shape ``(n, spectra, D)``) identified as their label."""
    probes = np.asarray(probes, dtype=np.float64)
    if probes.ndim != 3 or probes.shape[0] == 0:
        raise InvalidParameter("no probes to evaluate")
    if len(labels) != probes.shape[0]:
        raise DimensionMismatch("one label per probe is required")
    predicted = predict(gallery, probes, method, **options)
    hits = sum(p == t for p, t in zip(predicted, labels))
    return hits / len(labels)
