"""Palmprint identification from block DCT and wavelet-energy features."""

from .classifier import Gallery, PcaMode, Scoreboard, evaluate, majority_vote_classify, min_distance_classify
from .dataset import (
    SPECTRA,
    Dataset,
    GrayImage,
    PalmSample,
    SplitSpec,
    generate_synthetic,
    load_dataset,
    load_image,
    save_dataset,
    save_image,
    split,
)
from .features import (
    Standardizer,
    apply_standardizer,
    block_features,
    block_partition,
    fit_standardizer,
    flatten,
    image_features,
)
from .pca import PcaModel, pca_fit, pca_project, retained_energy
from .transforms import dct2, dwt2_db2, subband_energies, zigzag_take

__version__ = "0.1.0"
