"""End-to-end separation: subband preprocessing, ICA, time-domain unmixing.

The proposed path decomposes both mixtures over the critical-band tree,
picks the tree node whose coefficients are jointly most supergaussian, fits
FastICA on those coefficients, and applies the learned unmixing matrix to
the original time-domain mixtures. Baselines fit directly on the mixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .audio_io import PIPELINE_RATE_HZ, Signal
from .errors import DimensionError, ParameterError, UnsupportedRateError
from .filterbank import CbTree, FilterPair, build_cb_tree, db4_filters, decompose_nodes
from .separators import (
    DEFAULT_SOBI_LAGS,
    IcaOptions,
    UnmixingModel,
    apply_unmixing,
    fastica,
    sobi,
)
from .stats import (
    fit_whitening,
    score_nodes,
    select_best_node,
    select_best_per_channel,
)

METHOD_PROPOSED = "proposed"
METHOD_FASTICA = "fastica_plain"
METHOD_SOBI = "sobi"


@dataclass(frozen=True)
class SeparationResult:
    """Estimated sources plus fit provenance."""

    estimates: tuple
    model: UnmixingModel
    selected_node: tuple | None
    method: str
    converged: bool
    iterations: int


def _check_pair(x1: Signal, x2: Signal):
    if x1.sample_rate_hz != PIPELINE_RATE_HZ or x2.sample_rate_hz != PIPELINE_RATE_HZ:
        raise UnsupportedRateError(
            f"pipeline runs at {PIPELINE_RATE_HZ} Hz, got "
            f"{x1.sample_rate_hz} and {x2.sample_rate_hz}"
        )
    if len(x1) != len(x2):
        raise DimensionError(f"mixture lengths differ: {len(x1)} vs {len(x2)}")


def _finish(x, model, selected_node, method):
    estimates = apply_unmixing(model, x, mean=x.mean(axis=1))
    estimates = estimates / estimates.std(axis=1, keepdims=True)
    return SeparationResult(
        estimates=(
            Signal(estimates[0], PIPELINE_RATE_HZ),
            Signal(estimates[1], PIPELINE_RATE_HZ),
        ),
        model=model,
        selected_node=selected_node,
        method=method,
        converged=model.converged,
        iterations=model.iterations,
    )


def separate_proposed(
    x1: Signal,
    x2: Signal,
    opts: IcaOptions | None = None,
    per_channel_nodes: bool = False,
    refit_whitening: bool = False,
    tree: CbTree | None = None,
    filters: FilterPair | None = None,
) -> SeparationResult:
    """Separate two mixtures via the kurtosis-selected subband.

    per_channel_nodes picks each channel's best node independently instead
    of one common node (selected_node then holds both nodes);
    refit_whitening replaces the subband whitening with one fitted on the
    time-domain mixtures before applying the rotation.
    """
    _check_pair(x1, x2)
    if opts is None:
        opts = IcaOptions()
    if tree is None:
        tree = build_cb_tree(PIPELINE_RATE_HZ)
    if filters is None:
        filters = db4_filters()
    nodes1 = decompose_nodes(x1, tree, filters)
    nodes2 = decompose_nodes(x2, tree, filters)
    scores = score_nodes(nodes1, nodes2)
    if per_channel_nodes:
        node1, node2 = select_best_per_channel(scores, tree.fs_hz)
        selected = (node1, node2)
        subband = np.vstack([nodes1[node1], nodes2[node2]])
    else:
        best = select_best_node(scores, tree.fs_hz)
        selected = best.node
        subband = np.vstack([nodes1[best.node], nodes2[best.node]])
    model = fastica(subband, opts)
    x = np.vstack([x1.samples, x2.samples])
    if refit_whitening:
        model = replace(model, whitening=fit_whitening(x))
    return _finish(x, model, selected, METHOD_PROPOSED)


def separate_baseline(
    x1: Signal,
    x2: Signal,
    method: str,
    opts: IcaOptions | None = None,
    lags=DEFAULT_SOBI_LAGS,
) -> SeparationResult:
    """Separate two mixtures with a model fitted directly in the time domain."""
    _check_pair(x1, x2)
    x = np.vstack([x1.samples, x2.samples])
    if method == METHOD_FASTICA:
        model = fastica(x, opts if opts is not None else IcaOptions())
    elif method == METHOD_SOBI:
        model = sobi(x, lags)
    else:
        raise ParameterError(
            f"method must be {METHOD_FASTICA!r} or {METHOD_SOBI!r}, got {method!r}"
        )
    return _finish(x, model, None, method)
