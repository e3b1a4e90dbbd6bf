"""Separation-quality evaluation.

Each estimate is decomposed against the reference pair into a target part
(projection onto the matched reference), an interference part (remainder of
the projection onto the span of both references), and an artifact part (what
lies outside that span). SIR and SDR are energy ratios of these parts in dB;
segmental and overall SNR compare the estimate to its reference after a
least-squares gain fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import Signal
from .errors import DegenerateInputError, DimensionError

DB_CAP = 300.0

SEG_FRAME = 256
SEG_HOP = 128
SEG_FLOOR_DB = -10.0
SEG_CEIL_DB = 35.0


def _capped_db(numerator: float, denominator: float) -> float:
    """10 log10(numerator/denominator) of energies, capped to +-300 dB."""
    if numerator <= 0.0 and denominator <= 0.0:
        return 0.0
    if denominator <= 0.0:
        return DB_CAP
    if numerator <= 0.0:
        return -DB_CAP
    return float(np.clip(10.0 * np.log10(numerator / denominator), -DB_CAP, DB_CAP))


def _samples(signal):
    return signal.samples if isinstance(signal, Signal) else np.asarray(signal, float)


def align(estimates, references):
    """Match estimates to references by absolute Pearson correlation.

    Returns (permutation, signs) where permutation[i] is the reference index
    assigned to estimate i and signs[i] is the sign of that correlation.
    """
    est = [_samples(e) for e in estimates]
    ref = [_samples(r) for r in references]
    if len({arr.size for arr in est + ref}) != 1:
        raise DimensionError("estimates and references must share one length")
    corr = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            ei, rj = est[i], ref[j]
            denom = ei.std() * rj.std()
            if denom == 0.0:
                raise DegenerateInputError("zero-variance signal cannot be aligned")
            corr[i, j] = np.mean((ei - ei.mean()) * (rj - rj.mean())) / denom
    if abs(corr[0, 0]) + abs(corr[1, 1]) >= abs(corr[0, 1]) + abs(corr[1, 0]):
        permutation = (0, 1)
    else:
        permutation = (1, 0)
    signs = tuple(1 if corr[i, permutation[i]] >= 0 else -1 for i in range(2))
    return permutation, signs


@dataclass(frozen=True)
class BssDecomposition:
    """Additive split of an estimate: s_target + e_interf + e_artif."""

    s_target: np.ndarray
    e_interf: np.ndarray
    e_artif: np.ndarray
    collinear: bool = False


def bss_decompose(estimate, references, target_index: int) -> BssDecomposition:
    """Project an estimate onto the matched reference and the reference span.

    s_target is the projection onto the target reference, e_interf the rest
    of the projection onto span{references}, e_artif the remainder. With
    collinear references the interference term is defined as zero and the
    decomposition is flagged.
    """
    e = _samples(estimate)
    refs = [_samples(r) for r in references]
    if any(r.size != e.size for r in refs):
        raise DimensionError("estimate and references must share one length")
    target = refs[target_index]
    target_energy = target @ target
    if target_energy <= 0.0:
        raise DegenerateInputError("target reference carries no energy")
    s_target = (e @ target / target_energy) * target
    gram = np.array([[refs[0] @ refs[0], refs[0] @ refs[1]],
                     [refs[1] @ refs[0], refs[1] @ refs[1]]])
    collinear = np.linalg.det(gram) <= 1e-12 * gram[0, 0] * gram[1, 1]
    if collinear:
        p_span = s_target
    else:
        coeffs = np.linalg.solve(gram, np.array([refs[0] @ e, refs[1] @ e]))
        p_span = coeffs[0] * refs[0] + coeffs[1] * refs[1]
    e_interf = p_span - s_target
    e_artif = e - p_span
    return BssDecomposition(
        s_target=s_target, e_interf=e_interf, e_artif=e_artif, collinear=collinear
    )


def sir(decomposition: BssDecomposition) -> float:
    """Signal-to-interference ratio in dB, capped to +-300."""
    return _capped_db(
        float(decomposition.s_target @ decomposition.s_target),
        float(decomposition.e_interf @ decomposition.e_interf),
    )


def sdr(decomposition: BssDecomposition) -> float:
    """Signal-to-distortion ratio in dB (interference plus artifacts), capped."""
    distortion = decomposition.e_interf + decomposition.e_artif
    return _capped_db(
        float(decomposition.s_target @ decomposition.s_target),
        float(distortion @ distortion),
    )


def _ls_gain(reference, estimate):
    denom = estimate @ estimate
    return (reference @ estimate / denom) if denom > 0.0 else 0.0


def segmental_snr(estimate, reference) -> float:
    """Mean per-frame SNR in dB over 256-sample frames with 50% overlap.

    The estimate is scale-matched by a global least-squares gain; each
    frame's SNR is clamped to [-10, 35] dB and frames with (near) silent
    reference are excluded.
    """
    est = _samples(estimate)
    ref = _samples(reference)
    if est.size != ref.size:
        raise DimensionError("estimate and reference must share one length")
    if ref.size < SEG_FRAME:
        raise DimensionError(
            f"need at least one {SEG_FRAME}-sample frame, got {ref.size} samples"
        )
    gain = _ls_gain(ref, est)
    frame_snrs = []
    for start in range(0, ref.size - SEG_FRAME + 1, SEG_HOP):
        ref_frame = ref[start : start + SEG_FRAME]
        ref_energy = ref_frame @ ref_frame
        if ref_energy <= 1e-12:
            continue
        residual = ref_frame - gain * est[start : start + SEG_FRAME]
        noise_energy = residual @ residual
        if noise_energy <= 0.0:
            frame_snrs.append(SEG_CEIL_DB)
        else:
            frame_snrs.append(
                float(np.clip(10.0 * np.log10(ref_energy / noise_energy),
                              SEG_FLOOR_DB, SEG_CEIL_DB))
            )
    if not frame_snrs:
        raise DegenerateInputError("reference is silent in every frame")
    return float(np.mean(frame_snrs))


def overall_snr(estimate, reference) -> float:
    """Whole-signal SNR in dB after a least-squares gain fit, capped to +-300."""
    est = _samples(estimate)
    ref = _samples(reference)
    if est.size != ref.size:
        raise DimensionError("estimate and reference must share one length")
    ref_energy = ref @ ref
    if ref_energy <= 0.0:
        raise DegenerateInputError("reference carries no energy")
    residual = ref - _ls_gain(ref, est) * est
    return _capped_db(float(ref_energy), float(residual @ residual))


@dataclass(frozen=True)
class SourceMetrics:
    sir_db: float
    sdr_db: float
    seg_snr_db: float
    overall_snr_db: float


@dataclass(frozen=True)
class MetricsReport:
    """Per-source metrics after permutation/sign alignment."""

    per_source: tuple
    permutation: tuple
    signs: tuple


def evaluate_pair(estimates, references) -> MetricsReport:
    """Align two estimates with two references and score every metric.

    per_source[k] holds the metrics of the estimate matched to reference k.
    """
    permutation, signs = align(estimates, references)
    refs = [_samples(r) for r in references]
    ests = [_samples(e) for e in estimates]
    per_source = []
    for source_index in range(2):
        estimate_index = permutation.index(source_index)
        aligned = signs[estimate_index] * ests[estimate_index]
        decomposition = bss_decompose(aligned, refs, source_index)
        per_source.append(
            SourceMetrics(
                sir_db=sir(decomposition),
                sdr_db=sdr(decomposition),
                seg_snr_db=segmental_snr(aligned, refs[source_index]),
                overall_snr_db=overall_snr(aligned, refs[source_index]),
            )
        )
    return MetricsReport(
        per_source=tuple(per_source), permutation=permutation, signs=signs
    )
