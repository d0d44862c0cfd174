"""Successive-cancellation list decoding of convolutional polar codes.

Each path carries its own layered decoder state; at every non-frozen
phase the surviving paths fork on the current bit and the best L by
accumulated log-probability survive.  Frozen phases extend every path
with 0 and charge log P(u=0 | path) to the metric, which is what makes
the full-list decoder an exact MAP decoder.  The last two bits of a
frame fork on the conditionals of the final stored 3-bit joint.

Candidate payloads (the non-frozen bits, in u-index order) carry an
optional trailing CRC; selection prefers the best CRC-passing path and
falls back to the best metric when none pass.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .crc import CrcConfig, crc_check
from .gf2 import bit_reversal_perm
from .sc import ENC4, DecodeError, check_prior, frozen_mask


@dataclass
class Candidate:
    u_hat: np.ndarray
    c_hat: np.ndarray
    metric: float
    payload: np.ndarray       # non-frozen bits of u_hat, ascending u-index
    seed: int = 0             # which seed path this candidate descends from
    crc_ok: bool | None = None


@dataclass
class ListResult:
    candidates: list          # ranked by metric descending
    selected: int             # index into candidates

    @property
    def best(self):
        return self.candidates[self.selected]


def crc_select(candidates, cfg):
    """Index of the first CRC-passing candidate, else 0 (best metric)."""
    if not candidates:
        raise ValueError("empty candidate list")
    for i, cand in enumerate(candidates):
        ok = crc_check(cand.payload, cfg) if cand.payload.size > cfg.width else False
        cand.crc_ok = ok
    for i, cand in enumerate(candidates):
        if cand.crc_ok:
            return i
    return 0


def _rank(metrics, count):
    order = np.argsort(-metrics[:count], kind="stable")
    return order


def scl_decode_seeded_bmera(priors_phase, seed_metrics, fmask_phase, L,
                            record_survivors=False):
    """Kernel wrapper: phase-order seeded list decode (bmera family).

    priors_phase: (S, n, 2) leaf priors per seed path, already in phase
    order.  Returns (u_phase (k,n), c_phase (k,n), metrics (k,), seeds (k,))
    ranked by metric descending, plus survivor records when requested.
    """
    S, n, _ = priors_phase.shape
    if L < 1:
        raise ValueError("list size must be >= 1")
    if S > L:
        raise ValueError("more seed paths than list slots")
    m = n.bit_length() - 1
    p_off, psize = _kernels.p_layout_bmera(m)
    if record_survivors:
        surv_count = np.zeros(n, np.int64)
        surv_bits = np.full((n, L, n), -1, np.int8)
    else:
        surv_count = np.zeros(1, np.int64)
        surv_bits = np.full((1, 1, 1), -1, np.int8)
    err, nact, u_hats, c_hats, metrics, seeds = _kernels._bm_scl(
        np.ascontiguousarray(priors_phase, dtype=np.float64),
        np.ascontiguousarray(seed_metrics, dtype=np.float64),
        fmask_phase, L, p_off, ENC4, psize,
        record_survivors, surv_count, surv_bits)
    if err != 0:
        raise DecodeError("impossible evidence: every list path died")
    order = _rank(metrics, nact)
    out = (u_hats[order].astype(np.uint8), c_hats[order].astype(np.uint8),
           metrics[order], seeds[order])
    if record_survivors:
        return out + ((surv_count, surv_bits),)
    return out + (None,)


def decode_scl(prior, frozen, L, crc: CrcConfig | None = None, *,
               record_survivors=False):
    """List-decode one frame of ``c = u @ B_n @ G_n``.

    Returns a :class:`ListResult` with candidates ranked by metric.  When
    ``crc`` is given the selected candidate is the best CRC-passing one,
    falling back to rank 0.
    """
    prior = check_prior(prior)
    n = prior.shape[0]
    rev = bit_reversal_perm(n)
    fmask = frozen_mask(frozen, n)
    fmask_phase = fmask[rev]
    priors_phase = np.ascontiguousarray(prior[rev]).reshape(1, n, 2)
    u_ph, c_ph, metrics, seeds, surv = scl_decode_seeded_bmera(
        priors_phase, np.zeros(1), fmask_phase, L,
        record_survivors=record_survivors)
    info_idx = np.flatnonzero(~fmask)
    candidates = []
    for i in range(u_ph.shape[0]):
        u_pub = u_ph[i][rev]
        candidates.append(Candidate(
            u_hat=u_pub, c_hat=c_ph[i][rev], metric=float(metrics[i]),
            payload=u_pub[info_idx], seed=int(seeds[i])))
    selected = crc_select(candidates, crc) if crc is not None else 0
    result = ListResult(candidates=candidates, selected=selected)
    if record_survivors:
        result.survivors = surv
    return result
