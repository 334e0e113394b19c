"""Evaluation runs: accuracy per training fraction, and accuracy versus PCA size."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import Gallery, Method, PcaMode, evaluate
from .dataset import Dataset, SplitSpec, generate_synthetic, load_dataset, parse_fraction, split
from .errors import InvalidParameter, InvalidSplit, KOutOfRange
from .features import apply_standardizer, fit_standardizer, sample_features
from .pca import pca_fit

log = logging.getLogger(__name__)

REPORT_HEADER = ("scenario", "split", "k", "accuracy", "probes", "seconds")
TABLE1_SPLITS = ((4, 12), (5, 12), (6, 12))


@dataclass(frozen=True)
class SyntheticParams:
    persons: int = 50
    samples_per_person: int = 12
    width: int = 128
    height: int = 128
    noise_sigma: float = 8.0
    seed: int = 42

    def generate(self) -> Dataset:
        return generate_synthetic(
            self.persons, self.samples_per_person, self.width, self.height, self.noise_sigma, self.seed
        )


@dataclass(frozen=True)
class RunConfig:
    """One evaluation run.

    Exactly one data source is used: ``dataset`` if given, else ``data_dir``,
    else ``synthetic``. ``pca_k`` entries are component counts or ``"all"``
    for the unreduced features, and only make sense with ``min_distance``.
    """

    data_dir: Path | None = None
    synthetic: SyntheticParams = field(default_factory=SyntheticParams)
    dataset: Dataset | None = None
    splits: tuple[tuple[int, int], ...] = TABLE1_SPLITS
    split_seed: int | None = None
    method: Method = "majority_vote"
    pca_k: tuple[int | str, ...] = ()
    dct_count: int = 9
    vote_options: dict = field(default_factory=dict)
    out: Path | None = None

    def __post_init__(self) -> None:
        if self.pca_k and self.method != "min_distance":
            raise InvalidParameter("a PCA sweep requires the min_distance method")
        if not 1 <= self.dct_count <= 256:
            raise InvalidParameter(f"dct_count must be in [1, 256], got {self.dct_count}")
        for k in self.pca_k:
            if k != "all" and not (isinstance(k, (int, np.integer)) and k >= 1):
                raise InvalidParameter(f"bad PCA component count {k!r}")


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    split: str
    k: str
    accuracy: float
    probes: int
    seconds: float

    def fields(self, timing: bool = True) -> list[str]:
        out = [self.scenario, self.split, self.k, repr(self.accuracy), str(self.probes)]
        if timing:
            out.append(f"{self.seconds:.3f}")
        return out


@dataclass
class Report:
    rows: list[ReportRow] = field(default_factory=list)

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER if timing else REPORT_HEADER[:-1])
        for row in self.rows:
            w.writerow(row.fields(timing))
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


@dataclass(frozen=True)
class _Prepared:
    dataset: Dataset
    features: np.ndarray  # (samples, spectra, D)
    row_of: dict[tuple[str, int], int]


def _prepare(config: RunConfig) -> _Prepared:
    if config.dataset is not None:
        dataset = config.dataset
    elif config.data_dir is not None:
        dataset = load_dataset(config.data_dir)
    else:
        dataset = config.synthetic.generate()
    t0 = time.perf_counter()
    feats = sample_features(dataset.samples, config.dct_count)
    log.info("extracted %s features in %.2fs", feats.shape, time.perf_counter() - t0)
    row_of = {s.key: i for i, s in enumerate(dataset.samples)}
    return _Prepared(dataset, feats, row_of)


def _split_rows(prep: _Prepared, fraction: tuple[int, int], seed: int | None):
    train_count, total = fraction
    if total != prep.dataset.samples_per_person:
        raise InvalidSplit(
            f"split {train_count}/{total} does not match {prep.dataset.samples_per_person} samples per person"
        )
    train, test = split(prep.dataset, SplitSpec(train_count, seed))
    tr = [prep.row_of[s.key] for s in train]
    te = [prep.row_of[s.key] for s in test]
    return train, test, tr, te


def _standardize(train: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fit one standardizer per spectrum on ``train`` and apply it to both sides."""
    tr = np.empty_like(train)
    te = np.empty_like(test)
    for s in range(train.shape[1]):
        st = fit_standardizer(train[:, s, :])
        tr[:, s, :] = apply_standardizer(st, train[:, s, :])
        te[:, s, :] = apply_standardizer(st, test[:, s, :])
    return tr, te


def run_table1(config: RunConfig, prepared: _Prepared | None = None) -> Report:
    """Accuracy over all features for each training fraction."""
    prep = prepared or _prepare(config)
    report = Report()
    for fraction in config.splits:
        t0 = time.perf_counter()
        train, test, tr, te = _split_rows(prep, fraction, config.split_seed)
        gal_x, probe_x = prep.features[tr], prep.features[te]
        options = {}
        if config.method == "min_distance":
            gal_x, probe_x = _standardize(gal_x, probe_x)
        else:
            options = dict(config.vote_options)
        gallery = Gallery.build([s.person_id for s in train], [s.sample_index for s in train], gal_x)
        acc = evaluate(gallery, probe_x, [s.person_id for s in test], config.method, **options)
        row = ReportRow("table1", f"{fraction[0]}/{fraction[1]}", "all", acc, len(test), time.perf_counter() - t0)
        log.info("table1 %s: accuracy %.4f on %d probes", row.split, acc, len(test))
        report.rows.append(row)
    return report


def _k_sort_key(k: int | str) -> tuple[int, int]:
    return (1, 0) if k == "all" else (0, int(k))


def run_pca_curve(config: RunConfig, prepared: _Prepared | None = None) -> Report:
    """Minimum-distance accuracy for each PCA size in ``config.pca_k``.

    Features are standardized per spectrum on the training side, then one
    PCA model per spectrum is fit on the standardized training features.
    """
    if config.method != "min_distance":
        raise InvalidParameter("the PCA curve uses the min_distance method")
    if not config.pca_k:
        raise InvalidParameter("no PCA component counts given")
    prep = prepared or _prepare(config)
    d = prep.features.shape[2]
    for k in config.pca_k:
        if k != "all" and int(k) > d:
            raise KOutOfRange(f"k={k} exceeds the feature dimension {d}")

    report = Report()
    for fraction in config.splits:
        train, test, tr, te = _split_rows(prep, fraction, config.split_seed)
        labels = [s.person_id for s in test]
        ids = [s.person_id for s in train]
        idx = [s.sample_index for s in train]
        t_fit = time.perf_counter()
        gal_x, probe_x = _standardize(prep.features[tr], prep.features[te])
        models: tuple | None = None
        if any(k != "all" for k in config.pca_k):
            models = tuple(pca_fit(gal_x[:, s, :]) for s in range(gal_x.shape[1]))
        fit_seconds = time.perf_counter() - t_fit
        for k in sorted(config.pca_k, key=_k_sort_key):
            t0 = time.perf_counter()
            pca = None if k == "all" else PcaMode(models, int(k))
            gallery = Gallery.build(ids, idx, gal_x, pca)
            acc = evaluate(gallery, probe_x, labels, "min_distance")
            seconds = time.perf_counter() - t0 + (fit_seconds if pca else 0.0)
            row = ReportRow("pca_curve", f"{fraction[0]}/{fraction[1]}", str(k), acc, len(test), seconds)
            log.info("pca_curve %s k=%s: accuracy %.4f", row.split, k, acc)
            report.rows.append(row)
    return report


def parse_splits(text: str) -> tuple[tuple[int, int], ...]:
    return tuple(parse_fraction(t) for t in text.split(",") if t.strip())


def parse_k_list(text: str) -> tuple[int | str, ...]:
    out: list[int | str] = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        if token == "all":
            out.append("all")
            continue
        try:
            k = int(token)
        except ValueError as exc:
            raise InvalidParameter(f"bad component count {token!r}") from exc
        if k < 1:
            raise InvalidParameter(f"component count must be positive, got {k}")
        out.append(k)
    return tuple(out)


def prepare(config: RunConfig) -> _Prepared:
    """Load or generate the data and extract features once, for reuse across runs."""
    return _prepare(config)


def split_probe_count(persons: int, samples_per_person: int, train_count: int) -> int:
    return persons * (samples_per_person - train_count)


def rows_without_timing(report: Report) -> list[Sequence[str]]:
    return [r.fields(timing=False) for r in report.rows]
