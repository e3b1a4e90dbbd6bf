"""Shared test utilities: oracles and synthetic speech-like material."""

import numpy as np
from scipy.signal import fftconvolve, firwin

from bss_uwpd import Signal

FS = 8000

EQ8_MATRIX = np.array([[2.0, 1.0], [1.0, 1.0]])


def amari_index(p) -> float:
    """Distance of a matrix from a scaled permutation; 0 iff exact."""
    p = np.abs(np.asarray(p, dtype=np.float64))
    n = p.shape[0]
    rows = (p.sum(axis=1) / p.max(axis=1) - 1.0).sum()
    cols = (p.sum(axis=0) / p.max(axis=0) - 1.0).sum()
    return 0.5 * (rows + cols) / n


def band_noise(rng, n, band):
    """Unit-variance gaussian noise band-limited to (low, high) Hz."""
    low, high = band
    if low <= 0:
        taps = firwin(1025, high, fs=FS)
    else:
        taps = firwin(1025, [low, high], fs=FS, pass_zero=False)
    out = fftconvolve(rng.standard_normal(n), taps, mode="same")
    return out / out.std()


def supergaussian_band(rng, n, band, env_bw=100.0):
    """Band-limited bursty process: chi-squared envelope times band noise."""
    carrier = band_noise(rng, n, band)
    env_taps = firwin(2049, env_bw, fs=FS)
    slow = fftconvolve(rng.standard_normal(n), env_taps, mode="same")
    burst = slow**2 * carrier
    return burst / burst.std()

# Speech-like test sources: each source is supergaussian in its own band,
# carries a weaker supergaussian component in the partner band (so every
# informative subband holds both sources), and is padded to unit variance
# with gaussian noise in a shared mid band plus a white floor. The envelope
# spreads each band by ~2 * env_bw.
BAND_LOW = (0.0, 700.0)
BAND_HIGH = (2000.0, 3300.0)
BAND_MID = (900.0, 1900.0)
ENV_BW = 100.0
SUPPORT_LOW = (0.0, BAND_LOW[1] + 2 * ENV_BW)
SUPPORT_HIGH = (BAND_HIGH[0] - 2 * ENV_BW, BAND_HIGH[1] + 2 * ENV_BW)

_P_OWN = 0.22
_P_OTHER = 0.132


def speechlike_source(n, seed, own_band=BAND_LOW, other_band=BAND_HIGH) -> Signal:
    rng = np.random.default_rng(seed)
    p_mid = 1.0 - _P_OWN - _P_OTHER - 0.01
    s = (
        np.sqrt(_P_OWN) * supergaussian_band(rng, n, own_band, ENV_BW)
        + np.sqrt(_P_OTHER) * supergaussian_band(rng, n, other_band, ENV_BW)
        + np.sqrt(p_mid) * band_noise(rng, n, BAND_MID)
        + 0.1 * rng.standard_normal(n)
    )
    s -= s.mean()
    return Signal(s / s.std(), FS)


def speechlike_pair(n, seed):
    """Two independent sources with swapped band roles."""
    s1 = speechlike_source(n, 1000 + seed, BAND_LOW, BAND_HIGH)
    s2 = speechlike_source(n, 2000 + seed, BAND_HIGH, BAND_LOW)
    return s1, s2


def bands_overlap(band_a, band_b) -> bool:
    return band_a[0] < band_b[1] and band_b[0] < band_a[1]
