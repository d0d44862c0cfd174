"""Shared test utilities: enumeration oracles and prior generators.

The decoders are checked against exhaustive enumeration: every input
vector is encoded, weighted by the product of its leaf likelihoods, and
conditionals are read off the weighted table.  These oracles never touch
the recursion under test.
"""

import numpy as np

from bmera.gf2 import bit_reversal_perm, encode_bmera, encode_polar


def all_inputs(n):
    """(2^n, n) array of all bit vectors, row w = binary expansion of w."""
    w = np.arange(1 << n, dtype=np.int64)
    return ((w[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def codebook(n, family):
    u = all_inputs(n)
    enc = encode_bmera if family == "bmera" else encode_polar
    return u, np.array([enc(row) for row in u])


def random_prior(rng, n):
    prior = rng.random((n, 2))
    prior /= prior.sum(axis=1, keepdims=True)
    return prior


def seq_weights(prior, cw):
    """Product of leaf likelihoods for every codeword row."""
    n = prior.shape[0]
    return np.prod(prior[np.arange(n), cw], axis=1)


class BmeraEnumOracle:
    """Exhaustive conditional 3-bit joints, in decoder phase order."""

    def __init__(self, n):
        self.n = n
        self.rev = bit_reversal_perm(n)
        u, cw = codebook(n, "bmera")
        self.u_phase = u[:, self.rev]   # phase-order image of every input
        self.cw = cw

    def joints(self, prior, u_phase_decisions):
        """One normalized 8-entry joint per phase 0..n-3, conditioned on the
        given phase-order decision prefix."""
        n = self.n
        w = seq_weights(prior, self.cw)
        mask = np.ones(w.size, dtype=bool)
        out = []
        for phi in range(n - 2):
            t = (4 * self.u_phase[:, phi] + 2 * self.u_phase[:, phi + 1]
                 + self.u_phase[:, phi + 2])
            joint = np.bincount(t[mask], weights=w[mask], minlength=8)
            out.append(joint / joint.sum())
            mask &= self.u_phase[:, phi] == u_phase_decisions[phi]
        return np.array(out)

    def map_sequence(self, prior, frozen_u_idx=()):
        """argmax_u prod_i prior(c_i) over frozen-consistent inputs."""
        w = seq_weights(prior, self.cw)
        u = self.u_phase[:, self.rev]  # back to u order
        ok = np.ones(w.size, dtype=bool)
        for i in frozen_u_idx:
            ok &= u[:, i] == 0
        idx = np.flatnonzero(ok)
        return u[idx[np.argmax(w[idx])]]


class PolarEnumOracle:
    """Exhaustive single-bit conditionals for the polar baseline."""

    def __init__(self, n):
        self.n = n
        self.u, self.cw = codebook(n, "polar")

    def marginals(self, prior, u_decisions):
        w = seq_weights(prior, self.cw)
        mask = np.ones(w.size, dtype=bool)
        out = []
        for phi in range(self.n):
            p0 = w[mask & (self.u[:, phi] == 0)].sum()
            p1 = w[mask & (self.u[:, phi] == 1)].sum()
            out.append((p0 / (p0 + p1), p1 / (p0 + p1)))
            mask &= self.u[:, phi] == u_decisions[phi]
        return np.array(out)

    def map_sequence(self, prior, frozen_u_idx=()):
        w = seq_weights(prior, self.cw)
        ok = np.ones(w.size, dtype=bool)
        for i in frozen_u_idx:
            ok &= self.u[:, i] == 0
        idx = np.flatnonzero(ok)
        return self.u[idx[np.argmax(w[idx])]]


def delta_prior(c):
    n = len(c)
    prior = np.zeros((n, 2))
    prior[np.arange(n), np.asarray(c, dtype=np.int64)] = 1.0
    return prior


def designed_frozen(family, n, k, snr_db=2.0, frames=4000, seed=0):
    """A realistic frozen set for tests (GA for polar, BEC genie for bmera)."""
    from bmera.construction import (bec_surrogate_eps_bpsk, design_bmera_bec,
                                    design_polar_ga)
    if family == "polar":
        return design_polar_ga(n, k, snr_db).frozen
    eps = bec_surrogate_eps_bpsk(snr_db)
    return design_bmera_bec(n, k, eps, frames, seed).frozen
