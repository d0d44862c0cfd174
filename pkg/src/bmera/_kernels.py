"""Numba kernels for the successive-cancellation engines.

Everything here operates in decoder *phase order* on flat per-path arrays.

Memory layout, per path, for block length n = 2^m:

* ``B``: int8, one slot per (layer, branch, phase): index
  ``lam * n + (beta << lam) + phi``.  Layers 0..m all occupy n slots.
* probability storage lives in a shared pool ``Ppool`` of shape
  (2 * Lmax, psize).  A path addresses layer ``lam`` through
  ``rows[lam]`` (its pool row for that layer) at column offset
  ``p_off[lam] + 8 * beta`` (3-bit joints, bmera) or ``+ 2 * beta``
  (pair distributions, polar).  Rows are reassigned generation-wise on
  every layer recompute, so forked paths can share rows without any
  copy-on-write: a layer's content is only ever read between full
  overwrites of that layer.

Metric sentinel: impossible paths carry -1e300 rather than -inf so that
sums and comparisons never produce NaN.
"""

import math

import numpy as np
from numba import njit

NEG_INF = -1.0e300


def p_layout_bmera(m):
    """Column offsets of layers 2..m in the joint-distribution pool."""
    n = 1 << m
    p_off = np.zeros(m + 1, dtype=np.int64)
    acc = 0
    for lam in range(2, m + 1):
        p_off[lam] = acc
        acc += (1 << (m - lam)) * 8
    return p_off, acc


def p_layout_polar(m):
    """Column offsets of layers 1..m in the pair-distribution pool."""
    p_off = np.zeros(m + 1, dtype=np.int64)
    acc = 0
    for lam in range(1, m + 1):
        p_off[lam] = acc
        acc += (1 << (m - lam)) * 2
    return p_off, acc


@njit(cache=True)
def _safe_log(x):
    if x > 0.0:
        return math.log(x)
    return NEG_INF


# ---------------------------------------------------------------------------
# bmera: 3-bit-channel recursion
# ---------------------------------------------------------------------------


@njit(cache=True)
def _bm_init3(Ppool, rows, Bp, prior, p_off, n, phi, enc4):
    """Base layer 2: joint of three bits of each 4-leaf branch."""
    nb = n >> 2
    row = rows[2]
    base = p_off[2]
    err = 0
    for b in range(nb):
        o = base + 8 * b
        i0 = 4 * b
        if phi == 0:
            for u in range(8):
                acc = 0.0
                for t0 in range(2):
                    c = enc4[(u << 1) | t0]
                    acc += (prior[i0, (c >> 3) & 1]
                            * prior[i0 + 1, (c >> 2) & 1]
                            * prior[i0 + 2, (c >> 1) & 1]
                            * prior[i0 + 3, c & 1])
                Ppool[row, o + u] = acc
        else:
            b0 = Bp[2 * n + (b << 2)]
            for u in range(8):
                c = enc4[(b0 << 3) | u]
                Ppool[row, o + u] = (prior[i0, (c >> 3) & 1]
                                     * prior[i0 + 1, (c >> 2) & 1]
                                     * prior[i0 + 2, (c >> 1) & 1]
                                     * prior[i0 + 3, c & 1])
        s = 0.0
        for u in range(8):
            s += Ppool[row, o + u]
        if s <= 0.0:
            err = 1
        else:
            for u in range(8):
                Ppool[row, o + u] /= s
    return err


@njit(cache=True)
def _bm_layer(Ppool, rows, Bp, p_off, n, m, lam, phi):
    """One layer update of the 3-bit joints, all branches, one path."""
    nb = 1 << (m - lam)
    row_w = rows[lam]
    row_r = rows[lam - 1]
    base = p_off[lam]
    cbase = p_off[lam - 1]
    bbase = lam * n
    last = (1 << lam) - 3
    err = 0
    for b in range(nb):
        o = base + 8 * b
        ot = cbase + 16 * b
        ob = ot + 8
        ib = bbase + (b << lam)
        if phi == 0:
            for u in range(8):
                u0 = (u >> 2) & 1
                u1 = (u >> 1) & 1
                u2 = u & 1
                acc = 0.0
                for t in range(8):
                    t0 = (t >> 2) & 1
                    t1 = (t >> 1) & 1
                    t2 = t & 1
                    ut = ((u0 ^ u1 ^ u2) << 2) | ((u2 ^ t0) << 1) | t1
                    ub = ((u1 ^ u2) << 2) | (t0 << 1) | t2
                    acc += Ppool[row_r, ot + ut] * Ppool[row_r, ob + ub]
                Ppool[row_w, o + u] = acc
        elif phi == last:
            bm1 = Bp[ib + phi - 1]
            bm2 = Bp[ib + phi - 2]
            bm3 = Bp[ib + phi - 3]
            b0 = Bp[ib]
            for u in range(8):
                u0 = (u >> 2) & 1
                u1 = (u >> 1) & 1
                u2 = u & 1
                ub = ((bm2 ^ bm1) << 2) | ((u0 ^ u1) << 1) | (u2 ^ b0)
                ut = ub ^ ((bm3 << 2) | (bm1 << 1) | u1)
                Ppool[row_w, o + u] = Ppool[row_r, ot + ut] * Ppool[row_r, ob + ub]
        elif (phi & 1) == 0:
            bm1 = Bp[ib + phi - 1]
            bm2 = Bp[ib + phi - 2]
            for u in range(8):
                u0 = (u >> 2) & 1
                u1 = (u >> 1) & 1
                u2 = u & 1
                acc = 0.0
                for t0 in range(2):
                    ub = ((bm1 ^ u0) << 2) | ((u1 ^ u2) << 1) | t0
                    ut = ub ^ ((bm2 << 2) | (u0 << 1) | u2)
                    acc += Ppool[row_r, ot + ut] * Ppool[row_r, ob + ub]
                Ppool[row_w, o + u] = acc
        else:
            bm1 = Bp[ib + phi - 1]
            for u in range(8):
                u0 = (u >> 2) & 1
                u1 = (u >> 1) & 1
                u2 = u & 1
                acc = 0.0
                for t in range(4):
                    t0 = (t >> 1) & 1
                    t1 = t & 1
                    ub = ((u0 ^ u1) << 2) | ((u2 ^ t0) << 1) | t1
                    ut = ub ^ ((bm1 << 2) | (u1 << 1) | t0)
                    acc += Ppool[row_r, ot + ut] * Ppool[row_r, ob + ub]
                Ppool[row_w, o + u] = acc
        s = 0.0
        for u in range(8):
            s += Ppool[row_w, o + u]
        if s <= 0.0:
            err = 1
        else:
            for u in range(8):
                Ppool[row_w, o + u] /= s
    return err


@njit(cache=True)
def _bm_chain(m, phi, chain_lam, chain_phi):
    """Descent schedule of recursivelyCalcP from layer m at phase phi."""
    lam = m
    ph = phi
    d = 0
    while True:
        chain_lam[d] = lam
        chain_phi[d] = ph
        d += 1
        if lam == 2:
            break
        if ph == 0:
            lam -= 1
        elif (ph & 1) == 1 and ph != 1 and ph != (1 << lam) - 3:
            ph = (ph - 1) >> 1
            lam -= 1
        else:
            break
    return d


@njit(cache=True)
def _bm_update_b(Bp, n, m, lam, phi):
    while True:
        if lam == 0 or phi == 0 or ((phi & 1) == 1 and phi != (1 << lam) - 1):
            return
        psi = (phi - 1) >> 1
        nb = 1 << (m - lam)
        bbase = lam * n
        cbase = (lam - 1) * n
        half = lam - 1
        for b in range(nb):
            ib = bbase + (b << lam)
            it = cbase + ((2 * b) << half) + psi
            ibt = cbase + ((2 * b + 1) << half) + psi
            if (phi & 1) == 0:
                Bp[it] = Bp[ib + phi] ^ Bp[ib + phi - 1] ^ Bp[ib + phi - 2]
                Bp[ibt] = Bp[ib + phi] ^ Bp[ib + phi - 1]
            else:  # wrap: closing bit of this branch
                Bp[it] = Bp[ib] ^ Bp[ib + phi] ^ Bp[ib + phi - 1]
                Bp[ibt] = Bp[ib] ^ Bp[ib + phi]
        lam -= 1
        phi = psi


@njit(cache=True)
def _bm_calc_p_paths(Ppool, rowP, gen, Bmat, priors, seeds, p_off, n, m,
                     phi, enc4, nact, Lmax):
    """recursivelyCalcP for phase phi on every active path."""
    chain_lam = np.empty(m + 1, np.int64)
    chain_phi = np.empty(m + 1, np.int64)
    d = _bm_chain(m, phi, chain_lam, chain_phi)
    err = 0
    for i in range(d - 1, -1, -1):
        lam = chain_lam[i]
        ph = chain_phi[i]
        gen[lam] ^= 1
        for p in range(nact):
            rowP[lam, p] = gen[lam] * Lmax + p
            if lam == 2:
                err |= _bm_init3(Ppool, rowP[:, p], Bmat[p], priors[seeds[p]],
                                 p_off, n, ph, enc4)
            else:
                err |= _bm_layer(Ppool, rowP[:, p], Bmat[p], p_off, n, m, lam, ph)
    return err


@njit(cache=True)
def _bm_sc(prior, fmask, p_off, enc4, psize, collect):
    """Plain SC decode, phase order.  Returns (err, u_hat, c_hat, joints)."""
    n = prior.shape[0]
    m = 0
    while (1 << m) < n:
        m += 1
    Ppool = np.zeros((2, psize))
    rowP = np.zeros((m + 1, 1), np.int64)
    gen = np.zeros(m + 1, np.int64)
    Bmat = np.zeros((1, (m + 1) * n), np.int8)
    priors = prior.reshape(1, n, 2)
    seeds = np.zeros(1, np.int64)
    u_hat = np.zeros(n, np.int8)
    c_hat = np.zeros(n, np.int8)
    joints = np.zeros((n - 2, 8)) if collect else np.zeros((1, 8))
    Bp = Bmat[0]
    pm = p_off[m]
    for phi in range(n - 2):
        err = _bm_calc_p_paths(Ppool, rowP, gen, Bmat, priors, seeds, p_off,
                               n, m, phi, enc4, 1, 1)
        if err != 0:
            return err, u_hat, c_hat, joints
        row = rowP[m, 0]
        if collect:
            for u in range(8):
                joints[phi, u] = Ppool[row, pm + u]
        if fmask[phi]:
            bit = 0
        else:
            s0 = (Ppool[row, pm] + Ppool[row, pm + 1]
                  + Ppool[row, pm + 2] + Ppool[row, pm + 3])
            bit = 0 if s0 > 0.5 else 1
        Bp[m * n + phi] = bit
        _bm_update_b(Bp, n, m, m, phi)
    # last two bits from the stored joint
    row = rowP[m, 0]
    a = Bp[m * n + n - 3]
    if fmask[n - 2]:
        bit = 0
    else:
        p0 = Ppool[row, pm + 4 * a] + Ppool[row, pm + 4 * a + 1]
        p1 = Ppool[row, pm + 4 * a + 2] + Ppool[row, pm + 4 * a + 3]
        bit = 0 if p0 > p1 else 1
    Bp[m * n + n - 2] = bit
    _bm_update_b(Bp, n, m, m, n - 2)
    bb = Bp[m * n + n - 2]
    if fmask[n - 1]:
        bit = 0
    else:
        p0 = Ppool[row, pm + 4 * a + 2 * bb]
        p1 = Ppool[row, pm + 4 * a + 2 * bb + 1]
        bit = 0 if p0 > p1 else 1
    Bp[m * n + n - 1] = bit
    _bm_update_b(Bp, n, m, m, n - 1)
    for phi in range(n):
        u_hat[phi] = Bp[m * n + phi]
    for b in range(n):
        c_hat[b] = Bp[b]
    return 0, u_hat, c_hat, joints


@njit(cache=True)
def _bm_genie(prior, true_bits, p_off, enc4, psize, is_bec):
    """Genie-aided SC pass: per-phase first-error/ambiguity indicators."""
    n = prior.shape[0]
    m = 0
    while (1 << m) < n:
        m += 1
    Ppool = np.zeros((2, psize))
    rowP = np.zeros((m + 1, 1), np.int64)
    gen = np.zeros(m + 1, np.int64)
    Bmat = np.zeros((1, (m + 1) * n), np.int8)
    priors = prior.reshape(1, n, 2)
    seeds = np.zeros(1, np.int64)
    ind = np.zeros(n, np.uint8)
    Bp = Bmat[0]
    pm = p_off[m]
    for phi in range(n - 2):
        err = _bm_calc_p_paths(Ppool, rowP, gen, Bmat, priors, seeds, p_off,
                               n, m, phi, enc4, 1, 1)
        if err != 0:
            return 2, ind
        row = rowP[m, 0]
        s0 = (Ppool[row, pm] + Ppool[row, pm + 1]
              + Ppool[row, pm + 2] + Ppool[row, pm + 3])
        dec = 0 if s0 > 0.5 else 1
        bad = dec != true_bits[phi]
        if is_bec and abs(s0 - 0.5) <= 1e-9:
            bad = True
        ind[phi] = 1 if bad else 0
        Bp[m * n + phi] = true_bits[phi]
        _bm_update_b(Bp, n, m, m, phi)
    row = rowP[m, 0]
    a = true_bits[n - 3]
    p0 = Ppool[row, pm + 4 * a] + Ppool[row, pm + 4 * a + 1]
    p1 = Ppool[row, pm + 4 * a + 2] + Ppool[row, pm + 4 * a + 3]
    dec = 0 if p0 > p1 else 1
    bad = dec != true_bits[n - 2]
    if is_bec and abs(p0 - p1) <= 1e-9 * (p0 + p1):
        bad = True
    ind[n - 2] = 1 if bad else 0
    Bp[m * n + n - 2] = true_bits[n - 2]
    _bm_update_b(Bp, n, m, m, n - 2)
    bb = true_bits[n - 2]
    p0 = Ppool[row, pm + 4 * a + 2 * bb]
    p1 = Ppool[row, pm + 4 * a + 2 * bb + 1]
    dec = 0 if p0 > p1 else 1
    bad = dec != true_bits[n - 1]
    if is_bec and abs(p0 - p1) <= 1e-9 * (p0 + p1):
        bad = True
    ind[n - 1] = 1 if bad else 0
    return 0, ind


@njit(cache=True)
def _select(cand_metric, ncand, L, order_buf):
    """Top-L candidate indices: metric descending, stable in candidate index."""
    keys = np.empty(ncand)
    for i in range(ncand):
        keys[i] = -cand_metric[i]
    order = np.argsort(keys, kind="mergesort")
    keep = L if ncand > L else ncand
    for i in range(keep):
        order_buf[i] = order[i]
    return keep


@njit(cache=True)
def _bm_scl(priors, seed_metrics, fmask, L, p_off, enc4, psize,
            record, surv_count, surv_bits):
    """SCL decode, phase order, seeded with one path per prior row.

    Returns (err, nact, u_hats, c_hats, metrics, seed_idx).
    """
    S = priors.shape[0]
    n = priors.shape[1]
    m = 0
    while (1 << m) < n:
        m += 1
    bsize = (m + 1) * n
    Ppool = np.zeros((2 * L, psize))
    rowP = np.zeros((m + 1, L), np.int64)
    rowP_new = np.zeros((m + 1, L), np.int64)
    gen = np.zeros(m + 1, np.int64)
    Ba = np.zeros((L, bsize), np.int8)
    Bb = np.zeros((L, bsize), np.int8)
    met = np.full(L, NEG_INF)
    met_new = np.full(L, NEG_INF)
    seeds = np.zeros(L, np.int64)
    seeds_new = np.zeros(L, np.int64)
    q0s = np.empty(L)
    q1s = np.empty(L)
    cand_metric = np.empty(2 * L)
    order_buf = np.empty(2 * L, np.int64)
    u_hats = np.zeros((L, n), np.int8)
    c_hats = np.zeros((L, n), np.int8)
    nact = S
    for s in range(S):
        met[s] = seed_metrics[s]
        seeds[s] = s
    pm = p_off[m]
    dead = 0.5 * NEG_INF

    for phi in range(n):
        # conditional pair (q0, q1) for the current bit of every path.
        # A zero-sum joint just means that path's conditioning is
        # impossible; its branch dists stay all-zero and the path sinks
        # to the metric floor below.
        if phi <= n - 3:
            _bm_calc_p_paths(Ppool, rowP, gen, Ba, priors, seeds, p_off,
                             n, m, phi, enc4, nact, L)
        for p in range(nact):
            row = rowP[m, p]
            if phi <= n - 3:
                q0 = (Ppool[row, pm] + Ppool[row, pm + 1]
                      + Ppool[row, pm + 2] + Ppool[row, pm + 3])
                q1 = (Ppool[row, pm + 4] + Ppool[row, pm + 5]
                      + Ppool[row, pm + 6] + Ppool[row, pm + 7])
            elif phi == n - 2:
                a = Ba[p, m * n + n - 3]
                q0 = Ppool[row, pm + 4 * a] + Ppool[row, pm + 4 * a + 1]
                q1 = Ppool[row, pm + 4 * a + 2] + Ppool[row, pm + 4 * a + 3]
                norm = q0 + q1
                if norm > 0.0:
                    q0 /= norm
                    q1 /= norm
            else:
                a = Ba[p, m * n + n - 3]
                bb = Ba[p, m * n + n - 2]
                q0 = Ppool[row, pm + 4 * a + 2 * bb]
                q1 = Ppool[row, pm + 4 * a + 2 * bb + 1]
                norm = q0 + q1
                if norm > 0.0:
                    q0 /= norm
                    q1 /= norm
            q0s[p] = q0
            q1s[p] = q1

        if fmask[phi]:
            # frozen: extend every path with 0 in place, no reselection
            alive = False
            for p in range(nact):
                met[p] += _safe_log(q0s[p])
                Ba[p, m * n + phi] = 0
                if met[p] > dead:
                    alive = True
            if not alive:
                return 1, nact, u_hats, c_hats, met, seeds
        else:
            for p in range(nact):
                cand_metric[2 * p] = met[p] + _safe_log(q0s[p])
                cand_metric[2 * p + 1] = met[p] + _safe_log(q1s[p])
            keep = _select(cand_metric[:2 * nact], 2 * nact, L, order_buf)
            if not cand_metric[order_buf[0]] > dead:
                return 1, nact, u_hats, c_hats, met, seeds
            for j in range(keep):
                ci = order_buf[j]
                parent = ci >> 1
                bit = ci & 1
                for t in range(bsize):
                    Bb[j, t] = Ba[parent, t]
                Bb[j, m * n + phi] = bit
                met_new[j] = cand_metric[ci]
                seeds_new[j] = seeds[parent]
                for lam in range(m + 1):
                    rowP_new[lam, j] = rowP[lam, parent]
            tmpB = Ba
            Ba = Bb
            Bb = tmpB
            tmpM = met
            met = met_new
            met_new = tmpM
            tmpS = seeds
            seeds = seeds_new
            seeds_new = tmpS
            tmpR = rowP
            rowP = rowP_new
            rowP_new = tmpR
            nact = keep

        for p in range(nact):
            _bm_update_b(Ba[p], n, m, m, phi)

        if record:
            surv_count[phi] = nact
            for p in range(nact):
                for t in range(phi + 1):
                    surv_bits[phi, p, t] = Ba[p, m * n + t]

    for p in range(nact):
        for phi in range(n):
            u_hats[p, phi] = Ba[p, m * n + phi]
        for b in range(n):
            c_hats[p, b] = Ba[p, b]
    return 0, nact, u_hats, c_hats, met, seeds


# ---------------------------------------------------------------------------
# polar: pair-distribution recursion
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pl_layer(Ppool, rows, Bp, prior, p_off, n, m, lam, phi):
    nb = 1 << (m - lam)
    row_w = rows[lam]
    base = p_off[lam]
    bbase = lam * n
    err = 0
    if lam == 1:
        # children are the channel priors
        for b in range(nb):
            o = base + 2 * b
            ib = bbase + (b << 1)
            if (phi & 1) == 0:
                for x in range(2):
                    Ppool[row_w, o + x] = (prior[2 * b, x] * prior[2 * b + 1, 0]
                                           + prior[2 * b, x ^ 1] * prior[2 * b + 1, 1])
            else:
                u0 = Bp[ib]
                for x in range(2):
                    Ppool[row_w, o + x] = prior[2 * b, u0 ^ x] * prior[2 * b + 1, x]
            s = Ppool[row_w, o] + Ppool[row_w, o + 1]
            if s <= 0.0:
                err = 1
            else:
                Ppool[row_w, o] /= s
                Ppool[row_w, o + 1] /= s
        return err
    row_r = rows[lam - 1]
    cbase = p_off[lam - 1]
    for b in range(nb):
        o = base + 2 * b
        ot = cbase + 4 * b
        ob = ot + 2
        ib = bbase + (b << lam)
        if (phi & 1) == 0:
            for x in range(2):
                Ppool[row_w, o + x] = (Ppool[row_r, ot + x] * Ppool[row_r, ob]
                                       + Ppool[row_r, ot + (x ^ 1)] * Ppool[row_r, ob + 1])
        else:
            u0 = Bp[ib + phi - 1]
            for x in range(2):
                Ppool[row_w, o + x] = Ppool[row_r, ot + (u0 ^ x)] * Ppool[row_r, ob + x]
        s = Ppool[row_w, o] + Ppool[row_w, o + 1]
        if s <= 0.0:
            err = 1
        else:
            Ppool[row_w, o] /= s
            Ppool[row_w, o + 1] /= s
    return err


@njit(cache=True)
def _pl_chain(m, phi, chain_lam, chain_phi):
    lam = m
    ph = phi
    d = 0
    while True:
        chain_lam[d] = lam
        chain_phi[d] = ph
        d += 1
        if lam == 1 or (ph & 1) == 1:
            break
        ph >>= 1
        lam -= 1
    return d


@njit(cache=True)
def _pl_update_b(Bp, n, m, lam, phi):
    while True:
        if (phi & 1) == 0 or lam == 0:
            return
        psi = phi >> 1
        nb = 1 << (m - lam)
        bbase = lam * n
        cbase = (lam - 1) * n
        half = lam - 1
        for b in range(nb):
            ib = bbase + (b << lam)
            it = cbase + ((2 * b) << half) + psi
            ibt = cbase + ((2 * b + 1) << half) + psi
            Bp[it] = Bp[ib + phi - 1] ^ Bp[ib + phi]
            Bp[ibt] = Bp[ib + phi]
        lam -= 1
        phi = psi


@njit(cache=True)
def _pl_calc_p_paths(Ppool, rowP, gen, Bmat, priors, seeds, p_off, n, m,
                     phi, nact, Lmax):
    chain_lam = np.empty(m + 1, np.int64)
    chain_phi = np.empty(m + 1, np.int64)
    d = _pl_chain(m, phi, chain_lam, chain_phi)
    err = 0
    for i in range(d - 1, -1, -1):
        lam = chain_lam[i]
        ph = chain_phi[i]
        gen[lam] ^= 1
        for p in range(nact):
            rowP[lam, p] = gen[lam] * Lmax + p
            err |= _pl_layer(Ppool, rowP[:, p], Bmat[p], priors[seeds[p]],
                             p_off, n, m, lam, ph)
    return err


@njit(cache=True)
def _pl_sc(prior, fmask, p_off, psize, collect):
    n = prior.shape[0]
    m = 0
    while (1 << m) < n:
        m += 1
    Ppool = np.zeros((2, psize))
    rowP = np.zeros((m + 1, 1), np.int64)
    gen = np.zeros(m + 1, np.int64)
    Bmat = np.zeros((1, (m + 1) * n), np.int8)
    priors = prior.reshape(1, n, 2)
    seeds = np.zeros(1, np.int64)
    u_hat = np.zeros(n, np.int8)
    c_hat = np.zeros(n, np.int8)
    pairs = np.zeros((n, 2)) if collect else np.zeros((1, 2))
    Bp = Bmat[0]
    pm = p_off[m]
    for phi in range(n):
        err = _pl_calc_p_paths(Ppool, rowP, gen, Bmat, priors, seeds, p_off,
                               n, m, phi, 1, 1)
        if err != 0:
            return err, u_hat, c_hat, pairs
        row = rowP[m, 0]
        if collect:
            pairs[phi, 0] = Ppool[row, pm]
            pairs[phi, 1] = Ppool[row, pm + 1]
        if fmask[phi]:
            bit = 0
        else:
            bit = 0 if Ppool[row, pm] > 0.5 else 1
        Bp[m * n + phi] = bit
        _pl_update_b(Bp, n, m, m, phi)
    for phi in range(n):
        u_hat[phi] = Bp[m * n + phi]
    for b in range(n):
        c_hat[b] = Bp[b]
    return 0, u_hat, c_hat, pairs


@njit(cache=True)
def _pl_genie(prior, true_bits, p_off, psize, is_bec):
    n = prior.shape[0]
    m = 0
    while (1 << m) < n:
        m += 1
    Ppool = np.zeros((2, psize))
    rowP = np.zeros((m + 1, 1), np.int64)
    gen = np.zeros(m + 1, np.int64)
    Bmat = np.zeros((1, (m + 1) * n), np.int8)
    priors = prior.reshape(1, n, 2)
    seeds = np.zeros(1, np.int64)
    ind = np.zeros(n, np.uint8)
    Bp = Bmat[0]
    pm = p_off[m]
    for phi in range(n):
        err = _pl_calc_p_paths(Ppool, rowP, gen, Bmat, priors, seeds, p_off,
                               n, m, phi, 1, 1)
        if err != 0:
            return 2, ind
        row = rowP[m, 0]
        s0 = Ppool[row, pm]
        dec = 0 if s0 > 0.5 else 1
        bad = dec != true_bits[phi]
        if is_bec and abs(s0 - 0.5) <= 1e-9:
            bad = True
        ind[phi] = 1 if bad else 0
        Bp[m * n + phi] = true_bits[phi]
        _pl_update_b(Bp, n, m, m, phi)
    return 0, ind


@njit(cache=True)
def _pl_scl(priors, seed_metrics, fmask, L, p_off, psize,
            record, surv_count, surv_bits):
    S = priors.shape[0]
    n = priors.shape[1]
    m = 0
    while (1 << m) < n:
        m += 1
    bsize = (m + 1) * n
    Ppool = np.zeros((2 * L, psize))
    rowP = np.zeros((m + 1, L), np.int64)
    rowP_new = np.zeros((m + 1, L), np.int64)
    gen = np.zeros(m + 1, np.int64)
    Ba = np.zeros((L, bsize), np.int8)
    Bb = np.zeros((L, bsize), np.int8)
    met = np.full(L, NEG_INF)
    met_new = np.full(L, NEG_INF)
    seeds = np.zeros(L, np.int64)
    seeds_new = np.zeros(L, np.int64)
    cand_metric = np.empty(2 * L)
    order_buf = np.empty(2 * L, np.int64)
    u_hats = np.zeros((L, n), np.int8)
    c_hats = np.zeros((L, n), np.int8)
    nact = S
    for s in range(S):
        met[s] = seed_metrics[s]
        seeds[s] = s
    pm = p_off[m]
    dead = 0.5 * NEG_INF

    for phi in range(n):
        # zero pairs mark dead paths; they sink via the metric floor
        _pl_calc_p_paths(Ppool, rowP, gen, Ba, priors, seeds, p_off,
                         n, m, phi, nact, L)
        if fmask[phi]:
            alive = False
            for p in range(nact):
                met[p] += _safe_log(Ppool[rowP[m, p], pm])
                Ba[p, m * n + phi] = 0
                if met[p] > dead:
                    alive = True
            if not alive:
                return 1, nact, u_hats, c_hats, met, seeds
        else:
            for p in range(nact):
                row = rowP[m, p]
                cand_metric[2 * p] = met[p] + _safe_log(Ppool[row, pm])
                cand_metric[2 * p + 1] = met[p] + _safe_log(Ppool[row, pm + 1])
            keep = _select(cand_metric[:2 * nact], 2 * nact, L, order_buf)
            if not cand_metric[order_buf[0]] > dead:
                return 1, nact, u_hats, c_hats, met, seeds
            for j in range(keep):
                ci = order_buf[j]
                parent = ci >> 1
                bit = ci & 1
                for t in range(bsize):
                    Bb[j, t] = Ba[parent, t]
                Bb[j, m * n + phi] = bit
                met_new[j] = cand_metric[ci]
                seeds_new[j] = seeds[parent]
                for lam in range(m + 1):
                    rowP_new[lam, j] = rowP[lam, parent]
            tmpB = Ba
            Ba = Bb
            Bb = tmpB
            tmpM = met
            met = met_new
            met_new = tmpM
            tmpS = seeds
            seeds = seeds_new
            seeds_new = tmpS
            tmpR = rowP
            rowP = rowP_new
            rowP_new = tmpR
            nact = keep
        for p in range(nact):
            _pl_update_b(Ba[p], n, m, m, phi)
        if record:
            surv_count[phi] = nact
            for p in range(nact):
                for t in range(phi + 1):
                    surv_bits[phi, p, t] = Ba[p, m * n + t]

    for p in range(nact):
        for phi in range(n):
            u_hats[p, phi] = Ba[p, m * n + phi]
        for b in range(n):
            c_hats[p, b] = Ba[p, b]
    return 0, nact, u_hats, c_hats, met, seeds
