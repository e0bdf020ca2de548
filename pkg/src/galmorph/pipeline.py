"""Feature assembly: standardized images -> PCA coefficients and/or FDV."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from galmorph import pca
from galmorph.fractal import fd_feature
from galmorph.learn import LabeledDataset
from galmorph.raster import GrayImage
from galmorph.standardize import standardize

FEATURE_CONFIGS = ("pcs", "pcs+fdv", "fdv", "1pc", "1pc+fdv")
DEFAULT_COMPONENTS = 12


@dataclass(frozen=True, eq=False)
class FeatureSource:
    """Everything needed to build any feature configuration for one image set."""

    labels: tuple[str, ...]
    model: pca.PcaModel
    coeffs: np.ndarray  # (M, n_components)
    fdv: np.ndarray  # (M,)

    def dataset(self, config: str, n_components: int = DEFAULT_COMPONENTS) -> LabeledDataset:
        if config not in FEATURE_CONFIGS:
            raise ValueError(f"unknown feature configuration {config!r}; expected one of {FEATURE_CONFIGS}")
        n = 1 if config.startswith("1pc") else int(n_components)
        if not 1 <= n <= self.model.n_components:
            raise ValueError(f"{n} components requested, PCA model has {self.model.n_components}")
        cols, names = [], []
        if config != "fdv":
            cols.append(self.coeffs[:, :n])
            names += [f"pc{i + 1}" for i in range(n)]
        if config.endswith("fdv"):
            cols.append(self.fdv[:, None])
            names.append("fdv")
        return LabeledDataset(np.hstack(cols), self.labels, tuple(names))

    def label(self, config: str, n_components: int = DEFAULT_COMPONENTS) -> str:
        """Column label such as ``12 PCs + FDV``."""
        n = 1 if config.startswith("1pc") else int(n_components)
        pcs = f"{n} PC" + ("s" if n != 1 else "")
        return {"pcs": pcs, "pcs+fdv": f"{pcs} + FDV", "fdv": "FDV", "1pc": pcs, "1pc+fdv": f"{pcs} + FDV"}[config]


def standardize_all(images: Sequence[GrayImage]) -> list[GrayImage]:
    return [standardize(img) for img in images]


def build_features(images: Sequence[GrayImage], labels: Sequence[str]) -> FeatureSource:
    """PCA over the whole image set plus the gray D0 of every image.

    Images must share one shape (standardize them first for mixed sizes).
    """
    shapes = {img.shape for img in images}
    if len(shapes) != 1:
        raise ValueError(f"images must share one shape for PCA, got {sorted(shapes)}")
    vectors = np.stack([pca.image_vector(img) for img in images])
    model = pca.fit(vectors)
    coeffs = pca.project(model, vectors)
    fdv = np.array([fd_feature(img) for img in images])
    return FeatureSource(tuple(labels), model, coeffs, fdv)
