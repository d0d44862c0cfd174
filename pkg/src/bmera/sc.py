"""Successive-cancellation decoding of convolutional polar codes.

The recursion unit is the joint posterior of three consecutive input bits
(an 8-entry distribution); single-bit channels do not recurse for this
code family.

Phase order vs. public order
----------------------------
Internally the decoder walks the code graph in *phase order*, which
decodes ``u' = u @ B_n``: graph leaf ``j`` carries codeword bit
``rev(j)`` of the public code ``c = u @ B_n @ G_n``.  ``decode_sc``
translates at the boundary: channel priors arrive in codeword order,
frozen indices refer to ``u``, and the returned ``(u_hat, c_hat)`` are in
public order.  The bit-reversal permutation is an involution, so one
gather handles each direction.

Two engines are provided: a plain-Python reference (``DecoderState`` plus
``decode_sc(..., engine="reference")``), kept deliberately close to the
recursive formulation and used by the oracle tests, and the numba fast
path used everywhere else.  Both produce identical joints to float
precision.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .gf2 import bit_reversal_perm, bmera_generator, bit_reversal_matrix, gf2_matmul

PRIOR_TOL = 1e-6


class DecodeError(ValueError):
    """Raised when conditioning renders the evidence impossible."""


def _enc4_table():
    """Length-4 branch encoder c = w @ G_4 @ B_4, packed as 4-bit words."""
    g4b4 = gf2_matmul(bmera_generator(4), bit_reversal_matrix(4))
    table = np.zeros(16, dtype=np.uint8)
    for w in range(16):
        bits = np.array([(w >> 3) & 1, (w >> 2) & 1, (w >> 1) & 1, w & 1],
                        dtype=np.uint8)
        c = gf2_matmul(bits.reshape(1, 4), g4b4).ravel()
        table[w] = (c[0] << 3) | (c[1] << 2) | (c[2] << 1) | c[3]
    return table


ENC4 = _enc4_table()


def check_prior(prior, min_n=4):
    """Validate a channel prior array of (P(c=0|y), P(c=1|y)) pairs."""
    prior = np.ascontiguousarray(prior, dtype=np.float64)
    if prior.ndim != 2 or prior.shape[1] != 2:
        raise ValueError(f"prior must have shape (n, 2), got {prior.shape}")
    n = prior.shape[0]
    if n < min_n or (n & (n - 1)) != 0:
        raise ValueError(f"block length must be a power of two >= {min_n}, got {n}")
    if np.any(prior < 0):
        raise ValueError("prior contains negative probabilities")
    sums = prior.sum(axis=1)
    worst = np.abs(sums - 1.0).max()
    if worst > PRIOR_TOL:
        raise ValueError(f"prior pairs must sum to 1 within {PRIOR_TOL}, "
                         f"worst deviation {worst:.3g}")
    return prior


def frozen_mask(frozen, n):
    """Boolean mask over u-indices from an iterable of frozen positions."""
    mask = np.zeros(n, dtype=np.bool_)
    for i in frozen:
        i = int(i)
        if not 0 <= i < n:
            raise ValueError(f"frozen index {i} out of range for n={n}")
        mask[i] = True
    return mask


class DecoderState:
    """Layered state of one phase-order decode (reference engine).

    ``P[lam][beta]`` holds the current 8-entry joint of branch ``beta`` at
    layer ``lam``; ``B[lam][beta][phi]`` the propagated hard bits.  The
    state is single-use and not shared across decodes.
    """

    def __init__(self, prior_phase):
        prior_phase = np.asarray(prior_phase, dtype=np.float64)
        n = prior_phase.shape[0]
        m = n.bit_length() - 1
        self.n = n
        self.m = m
        self.prior = prior_phase
        self.P = {lam: np.zeros((1 << (m - lam), 8)) for lam in range(2, m + 1)}
        self.B = {lam: np.full((1 << (m - lam), 1 << lam), -1, dtype=np.int8)
                  for lam in range(m + 1)}

    def init_3bit_channels(self, phi):
        """Base layer 2: joint over three bits of each 4-leaf branch."""
        if phi not in (0, 1):
            raise ValueError(f"base-layer phase must be 0 or 1, got {phi}")
        for b in range(1 << (self.m - 2)):
            pr = self.prior[4 * b:4 * b + 4]
            out = np.zeros(8)
            for u in range(8):
                if phi == 0:
                    acc = 0.0
                    for t0 in (0, 1):
                        c = ENC4[(u << 1) | t0]
                        acc += (pr[0, (c >> 3) & 1] * pr[1, (c >> 2) & 1]
                                * pr[2, (c >> 1) & 1] * pr[3, c & 1])
                    out[u] = acc
                else:
                    c = ENC4[(int(self.B[2][b][0]) << 3) | u]
                    out[u] = (pr[0, (c >> 3) & 1] * pr[1, (c >> 2) & 1]
                              * pr[2, (c >> 1) & 1] * pr[3, c & 1])
            s = out.sum()
            if s <= 0:
                raise DecodeError("impossible evidence in base layer")
            self.P[2][b] = out / s

    def recursively_calc_p(self, lam, phi):
        """Update layer ``lam`` joints for phase ``phi`` (descends as needed)."""
        if not 2 <= lam <= self.m:
            raise ValueError(f"layer {lam} out of range")
        if not 0 <= phi <= (1 << lam) - 3:
            raise ValueError(f"phase {phi} out of range for layer {lam}")
        if lam == 2:
            self.init_3bit_channels(phi)
            return
        psi = (phi - 1) // 2
        if phi == 0:
            self.recursively_calc_p(lam - 1, 0)
        elif phi % 2 == 1 and phi != 1 and phi != (1 << lam) - 3:
            self.recursively_calc_p(lam - 1, psi)
        last = (1 << lam) - 3
        for b in range(1 << (self.m - lam)):
            pt = self.P[lam - 1][2 * b]
            pb = self.P[lam - 1][2 * b + 1]
            bb = self.B[lam][b]
            out = np.zeros(8)
            for u in range(8):
                u0, u1, u2 = (u >> 2) & 1, (u >> 1) & 1, u & 1
                acc = 0.0
                if phi == 0:
                    for t in range(8):
                        t0, t1, t2 = (t >> 2) & 1, (t >> 1) & 1, t & 1
                        ut = ((u0 ^ u1 ^ u2) << 2) | ((u2 ^ t0) << 1) | t1
                        ub = ((u1 ^ u2) << 2) | (t0 << 1) | t2
                        acc += pt[ut] * pb[ub]
                elif phi == last:
                    ub = (((bb[phi - 2] ^ bb[phi - 1]) << 2)
                          | ((u0 ^ u1) << 1) | (u2 ^ bb[0]))
                    ut = ub ^ ((bb[phi - 3] << 2) | (bb[phi - 1] << 1) | u1)
                    acc = pt[ut] * pb[ub]
                elif phi % 2 == 0:
                    for t0 in (0, 1):
                        ub = ((bb[phi - 1] ^ u0) << 2) | ((u1 ^ u2) << 1) | t0
                        ut = ub ^ ((bb[phi - 2] << 2) | (u0 << 1) | u2)
                        acc += pt[ut] * pb[ub]
                else:
                    for t in range(4):
                        t0, t1 = (t >> 1) & 1, t & 1
                        ub = ((u0 ^ u1) << 2) | ((u2 ^ t0) << 1) | t1
                        ut = ub ^ ((bb[phi - 1] << 2) | (u1 << 1) | t0)
                        acc += pt[ut] * pb[ub]
                out[u] = acc
            s = out.sum()
            if s <= 0:
                raise DecodeError("impossible evidence")
            self.P[lam][b] = out / s

    def recursively_update_b(self, lam, phi):
        """Propagate hard bits toward the leaves after a decision at ``lam``."""
        while True:
            if lam == 0 or phi == 0 or (phi % 2 == 1 and phi != (1 << lam) - 1):
                return
            psi = (phi - 1) // 2
            for b in range(1 << (self.m - lam)):
                bb = self.B[lam][b]
                if phi % 2 == 0:
                    self.B[lam - 1][2 * b][psi] = bb[phi] ^ bb[phi - 1] ^ bb[phi - 2]
                    self.B[lam - 1][2 * b + 1][psi] = bb[phi] ^ bb[phi - 1]
                else:  # closing bit of the branch, wraps onto bit 0
                    self.B[lam - 1][2 * b][psi] = bb[0] ^ bb[phi] ^ bb[phi - 1]
                    self.B[lam - 1][2 * b + 1][psi] = bb[0] ^ bb[phi]
            lam -= 1
            phi = psi

    def expose_joint(self):
        """Copy of the top-layer joint most recently computed."""
        return self.P[self.m][0].copy()


def _decode_phase_order_ref(prior_phase, fmask_phase, collect_joints=False):
    """Reference SC decode in phase order; returns (u', c', joints)."""
    st = DecoderState(prior_phase)
    n, m = st.n, st.m
    bm = st.B[m][0]
    joints = []
    for phi in range(n - 2):
        st.recursively_calc_p(m, phi)
        if collect_joints:
            joints.append(st.expose_joint())
        if fmask_phase[phi]:
            bm[phi] = 0
        else:
            bm[phi] = 0 if st.P[m][0][:4].sum() > 0.5 else 1
        st.recursively_update_b(m, phi)
    w = st.P[m][0]
    a = int(bm[n - 3])
    if fmask_phase[n - 2]:
        bm[n - 2] = 0
    else:
        p0 = w[4 * a] + w[4 * a + 1]
        p1 = w[4 * a + 2] + w[4 * a + 3]
        bm[n - 2] = 0 if p0 > p1 else 1
    st.recursively_update_b(m, n - 2)
    b = int(bm[n - 2])
    if fmask_phase[n - 1]:
        bm[n - 1] = 0
    else:
        p0 = w[4 * a + 2 * b]
        p1 = w[4 * a + 2 * b + 1]
        bm[n - 1] = 0 if p0 > p1 else 1
    st.recursively_update_b(m, n - 1)
    u_phase = np.array(bm, dtype=np.uint8)
    c_phase = np.array([st.B[0][i][0] for i in range(n)], dtype=np.uint8)
    return u_phase, c_phase, joints


@dataclass
class SCResult:
    u_hat: np.ndarray
    c_hat: np.ndarray
    joints: np.ndarray | None = None  # phase-order 3-bit joints, if collected


def decode_sc(prior, frozen=(), *, engine="fast", collect_joints=False):
    """SC-decode one frame of the code ``c = u @ B_n @ G_n``.

    Parameters
    ----------
    prior : (n, 2) array
        Per-codeword-bit posteriors (P(c_i=0|y_i), P(c_i=1|y_i)).
    frozen : iterable of int
        u-indices frozen to 0.
    collect_joints : bool
        Also return the exposed 3-bit joints (one per decoder phase,
        in phase order) for verification.
    """
    prior = check_prior(prior)
    n = prior.shape[0]
    rev = bit_reversal_perm(n)
    fmask = frozen_mask(frozen, n)[rev]
    prior_phase = np.ascontiguousarray(prior[rev])
    if engine == "reference":
        u_phase, c_phase, joints = _decode_phase_order_ref(
            prior_phase, fmask, collect_joints)
        joints_arr = np.array(joints) if collect_joints else None
    elif engine == "fast":
        m = n.bit_length() - 1
        p_off, psize = _kernels.p_layout_bmera(m)
        err, u_phase, c_phase, joints_arr = _kernels._bm_sc(
            prior_phase, fmask, p_off, ENC4, psize, collect_joints)
        if err != 0:
            raise DecodeError("impossible evidence (all-zero joint)")
        u_phase = u_phase.astype(np.uint8)
        c_phase = c_phase.astype(np.uint8)
        if not collect_joints:
            joints_arr = None
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return SCResult(u_hat=u_phase[rev], c_hat=c_phase[rev], joints=joints_arr)
