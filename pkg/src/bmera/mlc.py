"""Multilevel coding over 8-ASK with multistage list decoding.

One component code per label bit level.  Levels are decoded in order;
the surviving decoder paths of a level seed the next level's list (the
list is carried across levels, not collapsed to a hard decision), each
seed conditioning the next level's demapper on its own re-encoded
codeword bits.  A path's cross-level metric is the plain sum of its
per-level log metrics, which makes the full-list decoder an exact MAP
decoder on toy schemes.

64-QAM transmission is two independent real-dimension uses per symbol;
everything here works in the unit-energy per-real-dimension ASK picture
(see :func:`bmera.construction.qam64_dim_sigma2` for the matching noise
variance).
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .construction import CodeSpec, load_spec
from .crc import CrcConfig, crc_append, crc_check
from .gf2 import bit_reversal_perm
from .modem import ask8_map_levels, demap_bit_level
from .polar import scl_decode_seeded_polar
from .scl import scl_decode_seeded_bmera
from .sc import frozen_mask


@dataclass(frozen=True)
class MlcScheme:
    """Three component codes (one per bit level), list size, optional CRCs."""

    levels: tuple
    L: int = 1
    crcs: tuple = (None, None, None)

    def __post_init__(self):
        if len(self.levels) != 3:
            raise ValueError("8-ASK multilevel coding needs exactly 3 level codes")
        n = self.levels[0].n
        if any(spec.n != n for spec in self.levels):
            raise ValueError("all levels must share the block length")
        if self.L < 1:
            raise ValueError("list size must be >= 1")
        if len(self.crcs) != 3:
            raise ValueError("need one (possibly None) CRC config per level")
        for spec, crc in zip(self.levels, self.crcs):
            if crc is not None and spec.k <= crc.width:
                raise ValueError(
                    f"level code k={spec.k} cannot carry a {crc.width}-bit CRC")

    @property
    def n(self):
        return self.levels[0].n

    def k_info(self, level):
        crc = self.crcs[level]
        return self.levels[level].k - (crc.width if crc else 0)

    @property
    def total_info_bits(self):
        return sum(self.k_info(lev) for lev in range(3))

    @property
    def spectral_efficiency_per_dim(self):
        return self.total_info_bits / self.n

    @property
    def bits_per_qam_symbol(self):
        return 2.0 * self.spectral_efficiency_per_dim


def save_scheme(scheme, path, level_paths):
    """Write a scheme description file referencing per-level code specs.

    ``level_paths`` are the three CodeSpec file locations; relative paths
    are resolved against the scheme file's directory on load.
    """
    crcs = []
    for crc in scheme.crcs:
        crcs.append(None if crc is None else {
            "poly": crc.poly, "width": crc.width, "init": crc.init,
            "reflect": crc.reflect, "final_xor": crc.final_xor})
    doc = {
        "version": 1,
        "n": scheme.n,
        "family": [spec.family for spec in scheme.levels],
        "levels": list(level_paths),
        "L": scheme.L,
        "crc": crcs,
    }
    with open(path, "w") as f:
        json.dump(doc, f, sort_keys=True, indent=1)
        f.write("\n")


def load_scheme(path):
    """Read a scheme description file; level specs load from their files."""
    with open(path) as f:
        doc = json.load(f)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported scheme version {doc.get('version')!r}")
    base = os.path.dirname(os.path.abspath(path))
    levels = []
    for ref in doc["levels"]:
        ref_path = ref if os.path.isabs(ref) else os.path.join(base, ref)
        levels.append(load_spec(ref_path))
    crcs = []
    for entry in doc.get("crc", [None, None, None]):
        crcs.append(None if entry is None else CrcConfig(**entry))
    scheme = MlcScheme(levels=tuple(levels), L=int(doc["L"]), crcs=tuple(crcs))
    if scheme.n != doc.get("n", scheme.n):
        raise ValueError("scheme block length disagrees with its level specs")
    return scheme


def mlc_encode(info, scheme):
    """Encode per-level info bits into one block of 8-ASK amplitudes.

    Returns (symbols, codewords) where codewords has shape (3, n).
    """
    if len(info) != 3:
        raise ValueError("need info bits for exactly 3 levels")
    n = scheme.n
    codewords = np.zeros((3, n), dtype=np.uint8)
    for lev in range(3):
        spec = scheme.levels[lev]
        bits = np.asarray(info[lev], dtype=np.uint8)
        if bits.size != scheme.k_info(lev):
            raise ValueError(f"level {lev}: expected {scheme.k_info(lev)} info bits, "
                             f"got {bits.size}")
        payload = crc_append(bits, scheme.crcs[lev]) if scheme.crcs[lev] else bits
        u = np.zeros(n, dtype=np.uint8)
        u[spec.info_indices()] = payload
        codewords[lev] = spec.encode(u)
    return ask8_map_levels(codewords), codewords


def _list_decode(spec, priors_pub, seed_metrics, L):
    """Family dispatch for a seeded list decode with public-order arrays."""
    n = spec.n
    fmask = frozen_mask(spec.frozen, n)
    if spec.family == "bmera":
        rev = bit_reversal_perm(n)
        u_ph, c_ph, metrics, seeds, _ = scl_decode_seeded_bmera(
            np.ascontiguousarray(priors_pub[:, rev]), seed_metrics,
            fmask[rev], L)
        return u_ph[:, rev], c_ph[:, rev], metrics, seeds
    u_hats, c_hats, metrics, seeds, _ = scl_decode_seeded_polar(
        np.ascontiguousarray(priors_pub), seed_metrics, fmask, L)
    return u_hats, c_hats, metrics, seeds


@dataclass
class MlcLevelSurvivors:
    u: np.ndarray          # (P, n) input vectors
    c: np.ndarray          # (P, n) codewords
    metric: np.ndarray     # (P,) aggregate metric up to this level
    parent: np.ndarray     # (P,) index into the previous level's survivors
    crc_ok: np.ndarray     # (P,) bool, True when no CRC configured


@dataclass
class MlcResult:
    info: list             # selected per-level info bits
    u: list                # selected per-level input vectors
    codewords: np.ndarray  # (3, n) selected codewords
    metric: float
    crc_ok: bool
    levels: list = field(default_factory=list)  # MlcLevelSurvivors per level


def multistage_decode(y, scheme, sigma2):
    """Decode one multilevel block; keeps the list across bit levels."""
    y = np.asarray(y, dtype=np.float64)
    n = scheme.n
    if y.shape != (n,):
        raise ValueError(f"expected {n} real-dimension uses, got shape {y.shape}")
    levels = []
    prev = None
    for lev in range(3):
        spec = scheme.levels[lev]
        if prev is None:
            priors = demap_bit_level(y, 0, np.zeros((0, n), dtype=np.int64),
                                     sigma2).reshape(1, n, 2)
            seed_metrics = np.zeros(1)
        else:
            nprev = prev.u.shape[0]
            priors = np.empty((nprev, n, 2))
            for s in range(nprev):
                known = np.stack([_ancestor_codeword(levels, lev_i, lev, s)
                                  for lev_i in range(lev)])
                priors[s] = demap_bit_level(y, lev, known, sigma2)
            seed_metrics = prev.metric.copy()
        u_hats, c_hats, metrics, seeds = _list_decode(spec, priors, seed_metrics,
                                                      scheme.L)
        info_idx = spec.info_indices()
        crc = scheme.crcs[lev]
        if crc is not None:
            ok = np.array([crc_check(u_hats[i][info_idx], crc)
                           for i in range(u_hats.shape[0])])
            # CRC-passing candidates seed first; failing ones kept (list
            # starvation guard), ranked within each group by metric
            order = np.lexsort((np.arange(ok.size), ~ok))
            u_hats, c_hats, metrics, seeds, ok = (
                u_hats[order], c_hats[order], metrics[order], seeds[order], ok[order])
        else:
            ok = np.ones(u_hats.shape[0], dtype=bool)
        levels.append(MlcLevelSurvivors(u=u_hats, c=c_hats, metric=metrics,
                                        parent=seeds, crc_ok=ok))
        prev = levels[-1]

    # final selection: best aggregate metric among all-CRC-passing chains
    final = levels[-1]
    nfin = final.u.shape[0]
    all_ok = np.empty(nfin, dtype=bool)
    for i in range(nfin):
        ok = final.crc_ok[i]
        s = i
        for lev in (2, 1):
            s = int(levels[lev].parent[s])
            ok = ok and bool(levels[lev - 1].crc_ok[s])
        all_ok[i] = ok
    ranked = np.lexsort((np.arange(nfin), -final.metric))
    selected = None
    for i in ranked:
        if all_ok[i]:
            selected = int(i)
            break
    if selected is None:
        selected = int(ranked[0])

    chain = [0, 0, selected]
    chain[1] = int(levels[2].parent[selected])
    chain[0] = int(levels[1].parent[chain[1]])
    u_sel = [levels[lev].u[chain[lev]] for lev in range(3)]
    c_sel = np.stack([levels[lev].c[chain[lev]] for lev in range(3)])
    info = []
    for lev in range(3):
        payload = u_sel[lev][scheme.levels[lev].info_indices()]
        crc = scheme.crcs[lev]
        info.append(payload[:-crc.width] if crc else payload)
    return MlcResult(info=info, u=u_sel, codewords=c_sel,
                     metric=float(final.metric[selected]),
                     crc_ok=bool(all_ok[selected]), levels=levels)


def _ancestor_codeword(levels, lev_i, lev, s):
    """Codeword of level ``lev_i`` on the ancestry chain of survivor ``s``
    of level ``lev - 1``."""
    idx = s
    for l in range(lev - 1, lev_i, -1):
        idx = int(levels[l].parent[idx])
    return levels[lev_i].c[idx]
