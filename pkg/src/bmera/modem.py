"""Mappers, demappers and channels.

Conventions (also documented in the CLI help):

* all real constellations have unit average energy per real dimension;
  64-QAM is two independent 8-ASK uses scaled by 1/sqrt(2), so Es = 1
  per complex symbol either way;
* noise is N0/2 per real dimension, i.e. sigma^2 = 1 / (2 * Es/N0_lin);
* Eb/N0 [dB] = Es/N0 [dB] - 10 log10(rate * bits_per_symbol);
* 8-ASK labels are natural / set-partitioning: index i = b0 + 2 b1 + 4 b2,
  amplitude (2 i - 7)/sqrt(21).  Bit level 0 is demapped first.
"""

import math
from dataclasses import dataclass

import numpy as np

from .gf2 import as_bits

ASK8_SCALE = math.sqrt(21.0)  # E[(2i-7)^2] over i=0..7


def ask8_points():
    """The 8 unit-energy ASK amplitudes in label order."""
    return (2.0 * np.arange(8) - 7.0) / ASK8_SCALE


@dataclass(frozen=True)
class Constellation:
    points: np.ndarray        # amplitude per label index
    bits_per_symbol: int

    @classmethod
    def bpsk(cls):
        return cls(points=np.array([1.0, -1.0]), bits_per_symbol=1)

    @classmethod
    def ask8(cls):
        return cls(points=ask8_points(), bits_per_symbol=3)


def map_bpsk(c):
    """0 -> +1, 1 -> -1."""
    c = as_bits(c)
    return 1.0 - 2.0 * c.astype(np.float64)


def bpsk_posterior(y, sigma2):
    """(P(c=0|y), P(c=1|y)) for BPSK over AWGN, equal priors.

    Accepts scalars or arrays; the pair axis is last.
    """
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValueError("channel output contains non-finite values")
    t = np.tanh(y / sigma2)  # = sigmoid(2y/s2) folded to [-1, 1]
    return np.stack([0.5 * (1.0 + t), 0.5 * (1.0 - t)], axis=-1)


def map_ask8(b0, b1, b2):
    """Amplitude of the label (b0, b1, b2), level 0 least significant."""
    for b in (b0, b1, b2):
        if b not in (0, 1):
            raise ValueError("label bits must be 0 or 1")
    return (2.0 * (b0 + 2 * b1 + 4 * b2) - 7.0) / ASK8_SCALE


def ask8_map_levels(level_bits):
    """Vectorized 8-ASK mapping of a (3, n) array of per-level bits."""
    level_bits = np.asarray(level_bits)
    if level_bits.ndim != 2 or level_bits.shape[0] != 3:
        raise ValueError("expected a (3, n) array of level bits")
    idx = level_bits[0] + 2 * level_bits[1] + 4 * level_bits[2]
    return ask8_points()[idx]


def qam64_map(bits):
    """One 64-QAM symbol from 6 bits: I from bits 0..2, Q from bits 3..5."""
    bits = as_bits(bits, length=6)
    i = map_ask8(int(bits[0]), int(bits[1]), int(bits[2]))
    q = map_ask8(int(bits[3]), int(bits[4]), int(bits[5]))
    return (i + 1j * q) / math.sqrt(2.0)


def demap_bit_level(y, level, known, sigma2):
    """Posterior pair of bit level ``level`` of the 8-ASK label.

    ``known`` carries the decided bits of levels < level; undecided higher
    levels are marginalized with uniform priors.  Scalar form: ``y`` a
    float and ``known`` a length-``level`` sequence.  Vector form: ``y``
    of shape (n,) and ``known`` of shape (level, n).
    """
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    if not 0 <= level <= 2:
        raise ValueError("bit level must be 0, 1 or 2")
    y_arr = np.atleast_1d(np.asarray(y, dtype=np.float64))
    scalar = np.asarray(y).ndim == 0
    known = np.asarray(known, dtype=np.int64)
    if level == 0:
        known = known.reshape(0, y_arr.size)
    elif scalar:
        if known.shape != (level,):
            raise ValueError(f"expected {level} known bits, got shape {known.shape}")
        known = known.reshape(level, 1)
    elif known.shape != (level, y_arr.size):
        raise ValueError(f"known bits must have shape ({level}, {y_arr.size})")

    points = ask8_points()
    # log-likelihood of each of the 8 labels, stabilized per sample
    ll = -(y_arr[:, None] - points[None, :]) ** 2 / (2.0 * sigma2)
    mask = np.ones((y_arr.size, 8), dtype=bool)
    for j in range(level):
        bit_j = (np.arange(8) >> j) & 1
        mask &= bit_j[None, :] == known[j][:, None]
    ll = np.where(mask, ll, -np.inf)
    ll -= ll.max(axis=1, keepdims=True)
    w = np.exp(ll)
    bit_l = (np.arange(8) >> level) & 1
    p1 = (w * bit_l[None, :]).sum(axis=1)
    p0 = (w * (1 - bit_l)[None, :]).sum(axis=1)
    tot = p0 + p1
    out = np.stack([p0 / tot, p1 / tot], axis=-1)
    return out[0] if scalar else out


def awgn_transmit(x, sigma2, rng):
    """y = x + N(0, sigma2) per real dimension."""
    if sigma2 < 0:
        raise ValueError("noise variance must be nonnegative")
    x = np.asarray(x)
    sd = math.sqrt(sigma2)
    if np.iscomplexobj(x):
        return x + rng.normal(0.0, sd, x.shape) + 1j * rng.normal(0.0, sd, x.shape)
    return x + rng.normal(0.0, sd, x.shape)


def bec_transmit(c, eps, rng):
    """Channel prior after a binary erasure channel: deltas and erasures."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("erasure probability must be in [0, 1]")
    c = as_bits(c)
    n = c.size
    prior = np.zeros((n, 2))
    prior[np.arange(n), c] = 1.0
    erased = rng.random(n) < eps
    prior[erased] = 0.5
    return prior


@dataclass(frozen=True)
class AwgnChannel:
    """Bi-AWGN channel on BPSK-modulated codewords."""

    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("noise variance must be positive")

    @classmethod
    def from_esn0_db(cls, esn0_db):
        return cls(sigma2=esn0_db_to_sigma2(esn0_db))

    def prior_for_codeword(self, c, rng):
        y = awgn_transmit(map_bpsk(c), self.sigma2, rng)
        return bpsk_posterior(y, self.sigma2)


@dataclass(frozen=True)
class BecChannel:
    eps: float

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("erasure probability must be in [0, 1]")

    def prior_for_codeword(self, c, rng):
        return bec_transmit(c, self.eps, rng)


# ---- SNR bookkeeping -------------------------------------------------------


def esn0_db_to_sigma2(esn0_db):
    """Noise variance per real dimension for unit-energy constellations."""
    return 1.0 / (2.0 * 10.0 ** (esn0_db / 10.0))


def sigma2_to_esn0_db(sigma2):
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    return 10.0 * math.log10(1.0 / (2.0 * sigma2))


def ebn0_to_esn0_db(ebn0_db, rate, bits_per_symbol):
    if rate <= 0 or bits_per_symbol <= 0:
        raise ValueError("rate and bits_per_symbol must be positive")
    return ebn0_db + 10.0 * math.log10(rate * bits_per_symbol)


def esn0_to_ebn0_db(esn0_db, rate, bits_per_symbol):
    if rate <= 0 or bits_per_symbol <= 0:
        raise ValueError("rate and bits_per_symbol must be positive")
    return esn0_db - 10.0 * math.log10(rate * bits_per_symbol)
