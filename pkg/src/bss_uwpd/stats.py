"""Kurtosis scoring, whitening, and maximum-kurtosis node selection.

Excess kurtosis is the fourth-moment contrast E[y^4] - 3 (E[y^2])^2 of a
zero-mean unit-variance sequence: zero for Gaussian data, positive for
supergaussian (speech-like) data. Node selection keeps the tree node whose
two mixture channels are jointly most non-Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionError,
    SelectionError,
    SingularDataError,
)


def kurtosis(y) -> float:
    """Excess kurtosis of a sequence, after centering and scaling to unit
    variance. Biased (1/N) moment estimators throughout."""
    y = np.asarray(y, dtype=np.float64)
    if y.size < 4:
        raise DimensionError(f"kurtosis needs >= 4 samples, got {y.size}")
    centered = y - y.mean()
    variance = np.mean(centered**2)
    if variance <= 0.0 or not np.isfinite(variance):
        raise DegenerateInputError("zero-variance input has no kurtosis")
    z = centered / np.sqrt(variance)
    return float(np.mean(z**4) - 3.0)


@dataclass(frozen=True)
class NodeScore:
    """Per-channel kurtosis of one tree node; combined = min over channels."""

    node: tuple
    kurtosis_ch1: float
    kurtosis_ch2: float

    @property
    def combined(self) -> float:
        return min(self.kurtosis_ch1, self.kurtosis_ch2)


def score_nodes(coeffs_ch1, coeffs_ch2):
    """Kurtosis scores for every node present in both channel coefficient
    maps. Degenerate (zero-variance) channels score NaN."""
    scores = []
    for node in sorted(set(coeffs_ch1) & set(coeffs_ch2)):
        values = []
        for coeffs in (coeffs_ch1[node], coeffs_ch2[node]):
            try:
                values.append(kurtosis(coeffs))
            except DegenerateInputError:
                values.append(float("nan"))
        scores.append(NodeScore(node=node, kurtosis_ch1=values[0], kurtosis_ch2=values[1]))
    return scores


def _band_low(node, fs_hz):
    level, position = node
    return position * fs_hz / 2.0 ** (level + 1)


def select_best_node(scores, fs_hz: int = 8000) -> NodeScore:
    """Node maximizing the combined (min-over-channels) kurtosis.

    Ties break toward the lower-frequency, then shallower, node. Nodes
    without finite scores on both channels are skipped.
    """
    usable = [s for s in scores if np.isfinite(s.combined)]
    if not usable:
        raise SelectionError("every node scored as degenerate on some channel")
    return min(
        usable,
        key=lambda s: (-s.combined, _band_low(s.node, fs_hz), s.node[0]),
    )


def select_best_per_channel(scores, fs_hz: int = 8000):
    """Literal per-channel reading: the best node for each mixture channel
    independently, with the same tie-break. Returns (node_ch1, node_ch2)."""
    picked = []
    for attr in ("kurtosis_ch1", "kurtosis_ch2"):
        usable = [s for s in scores if np.isfinite(getattr(s, attr))]
        if not usable:
            raise SelectionError("every node scored as degenerate on some channel")
        best = min(
            usable,
            key=lambda s: (-getattr(s, attr), _band_low(s.node, fs_hz), s.node[0]),
        )
        picked.append(best.node)
    return tuple(picked)


@dataclass(frozen=True)
class WhiteningModel:
    """Affine transform taking fitted data to zero mean, identity covariance."""

    mean: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).copy()
        matrix = np.asarray(self.matrix, dtype=np.float64).copy()
        mean.setflags(write=False)
        matrix.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "matrix", matrix)

    def transform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.matrix @ (x - self.mean[:, None])


def fit_whitening(x) -> WhiteningModel:
    """Fit mean and whitening matrix D^(-1/2) E^T from the eigendecomposition
    of the (biased) sample covariance of 2-channel data shaped (2, N)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != 2:
        raise DimensionError(f"expected 2-channel data shaped (2, N), got {x.shape}")
    if x.shape[1] < 2:
        raise DimensionError("whitening needs at least 2 samples")
    mean = x.mean(axis=1)
    centered = x - mean[:, None]
    cov = centered @ centered.T / x.shape[1]
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] <= 1e-12 * max(evals[-1], 1.0):
        raise SingularDataError(
            "covariance is rank-deficient; channels are (nearly) collinear"
        )
    matrix = (evecs / np.sqrt(evals)).T
    return WhiteningModel(mean=mean, matrix=matrix)
