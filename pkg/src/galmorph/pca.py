"""Principal component analysis of image vectors via the Gram-matrix route.

With ``M`` objects of dimension ``d`` (``d`` >> ``M`` for images), the
scatter matrix ``C = A A^T`` (``A`` = columns of mean-centered objects)
shares its nonzero eigenvalues with the ``M x M`` Gram matrix ``A^T A``.
Eigenvectors ``u`` of the Gram matrix map back to ``v = A u / sqrt(k)``.
The scatter matrix is left unnormalized (no ``1/M``).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from galmorph.errors import PcaError
from galmorph.raster import GrayImage

FORMAT_VERSION = 1
# eigenvalues below this fraction of the largest are treated as zero
_RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (n, d), orthonormal rows
    eigenvalues: np.ndarray  # (n,), descending

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def cumvar(self) -> np.ndarray:
        total = self.eigenvalues.sum()
        return np.cumsum(self.eigenvalues) / total

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": FORMAT_VERSION,
                "dim": self.dim,
                "mean": self.mean.tolist(),
                "eigenvalues": self.eigenvalues.tolist(),
                "components": self.components.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "PcaModel":
        doc = json.loads(text)
        if doc.get("format_version") != FORMAT_VERSION:
            raise PcaError(f"unsupported PCA model format version {doc.get('format_version')!r}")
        dim = int(doc["dim"])
        comps = np.asarray(doc["components"], dtype=np.float64).reshape(-1, dim)
        return cls(
            np.asarray(doc["mean"], dtype=np.float64),
            comps,
            np.asarray(doc["eigenvalues"], dtype=np.float64),
        )

    def cumvar_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["component", "eigenvalue", "cumulative_variance"])
        for i, (k, c) in enumerate(zip(self.eigenvalues, self.cumvar), start=1):
            writer.writerow([i, repr(float(k)), repr(float(c))])
        return buf.getvalue()


def image_vector(img: GrayImage) -> np.ndarray:
    """Row-major pixel vector scaled to [0, 1]."""
    return img.pixels.astype(np.float64).ravel() / 255.0


def _as_matrix(objects) -> np.ndarray:
    try:
        X = np.asarray([np.asarray(o, dtype=np.float64).ravel() for o in objects])
    except ValueError as exc:
        raise PcaError(f"objects have inconsistent lengths: {exc}") from exc
    if X.dtype == object or X.ndim != 2:
        raise PcaError("objects have inconsistent lengths")
    return X


def fit(objects) -> PcaModel:
    """Fit PCA to ``M >= 2`` equal-length vectors.

    Components are sign-normalized so each one's largest-magnitude entry
    is positive. Raises ``PcaError`` if the data has no variance at all.
    """
    X = _as_matrix(objects)
    M = X.shape[0]
    if M < 2:
        raise PcaError(f"PCA needs at least 2 objects, got {M}")
    mean = X.mean(axis=0)
    A = X - mean  # rows are the difference vectors
    gram = A @ A.T
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    top = evals[0] if evals.size else 0.0
    if top <= 0.0:
        raise PcaError("rank-0 data: all objects are identical")
    keep = evals > _RANK_RTOL * top
    keep[M - 1 :] = False  # centering removes one degree of freedom
    evals = evals[keep]
    comps = (A.T @ evecs[:, keep]) / np.sqrt(evals)
    comps = comps.T
    # re-orthonormalize to clean up round-off from the back-mapping
    q, r = np.linalg.qr(comps.T)
    comps = (q * np.sign(np.diag(r))).T
    idx = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(comps.shape[0]), idx])
    comps = comps * signs[:, None]
    return PcaModel(mean, comps, evals)


def project(model: PcaModel, obj, n: int | None = None) -> np.ndarray:
    """Coordinates of ``obj - mean`` on the first ``n`` components.

    ``obj`` may be a single vector or a 2D array of row vectors.
    """
    if n is None:
        n = model.n_components
    if n < 0 or n > model.n_components:
        raise PcaError(f"requested {n} components, model has {model.n_components}")
    x = np.asarray(obj, dtype=np.float64)
    if x.shape[-1] != model.dim:
        raise PcaError(f"object length {x.shape[-1]} does not match model dimension {model.dim}")
    return (x - model.mean) @ model.components[:n].T


def reconstruct(model: PcaModel, coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = coeffs.shape[-1]
    return model.mean + coeffs @ model.components[:n]


def select_components(model_or_cumvar, variance_target: float) -> int:
    """Smallest ``n`` whose cumulative explained variance reaches the target."""
    if not 0.0 < variance_target <= 1.0:
        raise ValueError(f"variance target must be in (0, 1], got {variance_target}")
    cumvar = model_or_cumvar.cumvar if isinstance(model_or_cumvar, PcaModel) else np.asarray(model_or_cumvar)
    # round-off can leave the last entry a hair under 1
    hits = np.flatnonzero(cumvar >= variance_target - 1e-12)
    return int(hits[0]) + 1 if hits.size else len(cumvar)
