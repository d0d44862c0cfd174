"""Polar SC/SCL baseline.

Same decision rules, frozen handling, path metrics and CRC conventions
as the convolutional-polar decoder, so family comparisons differ only in
the transform.  The recursion unit here is the classic single-bit
channel (pair distributions); the decoder's phase order coincides with
the u-index order of ``c = u @ B_n @ F^{(x)m}``, so no index translation
is needed at the boundary.
"""

import numpy as np

from . import _kernels
from .crc import CrcConfig
from .sc import DecodeError, check_prior, frozen_mask
from .scl import Candidate, ListResult, _rank, crc_select


def decode_polar_sc(prior, frozen=(), *, collect_marginals=False):
    """SC-decode one polar frame; returns an object with u_hat / c_hat."""
    prior = check_prior(prior, min_n=2)
    n = prior.shape[0]
    fmask = frozen_mask(frozen, n)
    m = n.bit_length() - 1
    p_off, psize = _kernels.p_layout_polar(m)
    err, u_hat, c_hat, pairs = _kernels._pl_sc(
        np.ascontiguousarray(prior), fmask, p_off, psize, collect_marginals)
    if err != 0:
        raise DecodeError("impossible evidence (zero pair)")
    from .sc import SCResult
    return SCResult(u_hat=u_hat.astype(np.uint8), c_hat=c_hat.astype(np.uint8),
                    joints=pairs if collect_marginals else None)


def scl_decode_seeded_polar(priors, seed_metrics, fmask, L,
                            record_survivors=False):
    """Seeded polar list decode; same contract as the bmera variant."""
    S, n, _ = priors.shape
    if L < 1:
        raise ValueError("list size must be >= 1")
    if S > L:
        raise ValueError("more seed paths than list slots")
    m = n.bit_length() - 1
    p_off, psize = _kernels.p_layout_polar(m)
    if record_survivors:
        surv_count = np.zeros(n, np.int64)
        surv_bits = np.full((n, L, n), -1, np.int8)
    else:
        surv_count = np.zeros(1, np.int64)
        surv_bits = np.full((1, 1, 1), -1, np.int8)
    err, nact, u_hats, c_hats, metrics, seeds = _kernels._pl_scl(
        np.ascontiguousarray(priors, dtype=np.float64),
        np.ascontiguousarray(seed_metrics, dtype=np.float64),
        fmask, L, p_off, psize, record_survivors, surv_count, surv_bits)
    if err != 0:
        raise DecodeError("impossible evidence: every list path died")
    order = _rank(metrics, nact)
    out = (u_hats[order].astype(np.uint8), c_hats[order].astype(np.uint8),
           metrics[order], seeds[order])
    if record_survivors:
        return out + ((surv_count, surv_bits),)
    return out + (None,)


def decode_polar_scl(prior, frozen, L, crc: CrcConfig | None = None, *,
                     record_survivors=False):
    """List-decode one polar frame; mirrors ``decode_scl``."""
    prior = check_prior(prior, min_n=2)
    n = prior.shape[0]
    fmask = frozen_mask(frozen, n)
    u_hats, c_hats, metrics, seeds, surv = scl_decode_seeded_polar(
        prior.reshape(1, n, 2), np.zeros(1), fmask, L,
        record_survivors=record_survivors)
    info_idx = np.flatnonzero(~fmask)
    candidates = []
    for i in range(u_hats.shape[0]):
        candidates.append(Candidate(
            u_hat=u_hats[i], c_hat=c_hats[i], metric=float(metrics[i]),
            payload=u_hats[i][info_idx], seed=int(seeds[i])))
    selected = crc_select(candidates, crc) if crc is not None else 0
    result = ListResult(candidates=candidates, selected=selected)
    if record_survivors:
        result.survivors = surv
    return result
