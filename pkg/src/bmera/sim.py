"""Monte-Carlo link simulation.

Reproducibility contract: every frame draws its randomness from a
counter-based stream keyed by (master_seed, SNR point, frame index), and
the stopping rule is evaluated on frame counts committed in index order.
Results are therefore byte-identical regardless of how many worker
processes execute the frames (workers are set with the environment
variable ``BMERA_SIM_WORKERS`` and affect wall time only).

The CSV schema is fixed: ``snr_db, convention, frames, bit_errors,
frame_errors, ber, fer, seconds, spec_digest``.  The ``seconds`` column
is emitted as 0.000 to keep the bytes deterministic; measured wall time
goes to the log stream.
"""

import hashlib
import io
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .construction import (CodeSpec, bec_surrogate_eps_bpsk, design_bmera_bec,
                           design_mlc, design_polar_ga, load_spec,
                           qam64_dim_sigma2, save_spec)
from .crc import CrcConfig, crc_append
from .gf2 import encode_bmera, encode_polar
from .mlc import MlcScheme, mlc_encode, multistage_decode
from .modem import (awgn_transmit, bpsk_posterior, ebn0_to_esn0_db,
                    esn0_db_to_sigma2, esn0_to_ebn0_db, map_bpsk)
from .polar import decode_polar_sc, decode_polar_scl
from .sc import decode_sc
from .scl import decode_scl

CSV_COLUMNS = ("snr_db", "convention", "frames", "bit_errors", "frame_errors",
               "ber", "fer", "seconds", "spec_digest")

_CHUNK = 256


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    family: str = "bmera"
    modulation: str = "bpsk"
    decoder: str = "scl"
    n: int = 1024
    k: int = 512
    list_size: int = 32
    crc_bits: int = 0
    crc_poly: int = 0x07
    snr_db: tuple = ()
    snr_convention: str = "esn0"
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    master_seed: int = 1
    design_frames: int = 20_000
    design_snr_db: float | None = None   # None: design at each simulated point
    mi_samples: int = 200_000
    spec_cache_dir: str | None = None
    name: str = ""

    def __post_init__(self):
        if self.family not in ("polar", "bmera"):
            raise ConfigError(f"config key 'family': unknown value {self.family!r}")
        if self.modulation not in ("bpsk", "qam64"):
            raise ConfigError(f"config key 'modulation': unknown value {self.modulation!r}")
        if self.decoder not in ("sc", "scl"):
            raise ConfigError(f"config key 'decoder': unknown value {self.decoder!r}")
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ConfigError("config key 'n': must be a power of two >= 4")
        if self.modulation == "bpsk" and not 0 <= self.k <= self.n:
            raise ConfigError("config key 'k': out of range")
        if self.modulation == "qam64" and not 0 <= self.k <= 3 * self.n:
            raise ConfigError("config key 'k': out of range for qam64")
        if self.k_info <= 0:
            raise ConfigError("config key 'k': no information bits after CRC")
        if self.list_size < 1:
            raise ConfigError("config key 'list_size': must be >= 1")
        if not self.snr_db:
            raise ConfigError("config key 'snr_db': need at least one SNR point")
        if self.snr_convention not in ("esn0", "ebn0"):
            raise ConfigError("config key 'snr_convention': esn0 or ebn0")
        if self.min_frame_errors < 1:
            raise ConfigError("config key 'min_frame_errors': must be >= 1")
        if self.max_frames < 1:
            raise ConfigError("config key 'max_frames': must be >= 1")
        if self.crc_bits < 0:
            raise ConfigError("config key 'crc_bits': must be >= 0")

    @property
    def crc(self):
        if self.crc_bits == 0:
            return None
        return CrcConfig(poly=self.crc_poly, width=self.crc_bits)

    @property
    def k_info(self):
        if self.modulation == "qam64":
            return self.k - 3 * self.crc_bits if self.crc_bits else self.k
        return self.k - self.crc_bits

    @property
    def bits_per_symbol(self):
        return 1 if self.modulation == "bpsk" else 6

    @property
    def info_bits_per_symbol(self):
        n_symbols = self.n if self.modulation == "bpsk" else self.n / 2
        return self.k_info / n_symbols

    def esn0_db(self, snr_db):
        if self.snr_convention == "esn0":
            return float(snr_db)
        return ebn0_to_esn0_db(float(snr_db), self.info_bits_per_symbol /
                               self.bits_per_symbol, self.bits_per_symbol)

    def digest(self):
        canon = repr(sorted(self.__dict__.items()))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


_CONFIG_TYPES = {
    "family": str, "modulation": str, "decoder": str, "name": str,
    "snr_convention": str, "spec_cache_dir": str,
    "n": int, "k": int, "list_size": int, "crc_bits": int, "crc_poly": int,
    "min_frame_errors": int, "max_frames": int, "master_seed": int,
    "design_frames": int, "mi_samples": int,
    "design_snr_db": float,
    "snr_db": tuple,
}


def parse_config(text):
    """Flat ``key = value`` config; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"config key {key!r}: unknown key")
        typ = _CONFIG_TYPES[key]
        try:
            if typ is tuple:
                values[key] = tuple(float(v) for v in val.replace(",", " ").split())
            elif typ is int:
                values[key] = int(val, 0)
            elif typ is float:
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: bad value {val!r}") from exc
    return SimConfig(**values)


def _stream(master_seed, *parts):
    digest = hashlib.sha256("|".join(str(p) for p in [master_seed, *parts])
                            .encode()).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _design_seed(cfg, esn0_db):
    return f"{cfg.master_seed}-design-{cfg.family}-{cfg.n}-{cfg.k}-{esn0_db:.6f}"


# ---- per-point design -------------------------------------------------------


def _design_point_bpsk(cfg, esn0_design):
    label = _design_seed(cfg, esn0_design)
    if cfg.family == "polar":
        return design_polar_ga(cfg.n, cfg.k, esn0_design)
    eps = bec_surrogate_eps_bpsk(esn0_design)
    rng = _stream(cfg.master_seed, "design", cfg.family, cfg.n, cfg.k,
                  f"{esn0_design:.6f}")
    return design_bmera_bec(cfg.n, cfg.k, eps, cfg.design_frames, rng,
                            seed_label=label)


def _design_point_qam(cfg, esn0_design):
    rng = _stream(cfg.master_seed, "design-mlc", cfg.family, cfg.n, cfg.k,
                  f"{esn0_design:.6f}")
    specs, _ = design_mlc(cfg.n, cfg.k, esn0_design, family=cfg.family,
                          frames=cfg.design_frames, mi_samples=cfg.mi_samples,
                          rng=rng)
    return specs


def _cache_path(cfg, esn0_design, level=None):
    if cfg.spec_cache_dir is None:
        return None
    tag = f"{cfg.family}_{cfg.modulation}_n{cfg.n}_k{cfg.k}_s{esn0_design:.4f}" \
          f"_f{cfg.design_frames}_seed{cfg.master_seed}"
    if level is not None:
        tag += f"_lev{level}"
    return os.path.join(cfg.spec_cache_dir, tag + ".json")


def resolve_design(cfg, esn0_point):
    """Code spec(s) for one SNR point, using the cache when configured."""
    esn0_design = cfg.design_snr_db if cfg.design_snr_db is not None else esn0_point
    if cfg.modulation == "bpsk":
        path = _cache_path(cfg, esn0_design)
        if path and os.path.exists(path):
            return load_spec(path)
        spec = _design_point_bpsk(cfg, esn0_design)
        if path:
            os.makedirs(cfg.spec_cache_dir, exist_ok=True)
            save_spec(spec, path)
        return spec
    paths = [_cache_path(cfg, esn0_design, lev) for lev in range(3)]
    if paths[0] and all(p and os.path.exists(p) for p in paths):
        return [load_spec(p) for p in paths]
    specs = _design_point_qam(cfg, esn0_design)
    if paths[0]:
        os.makedirs(cfg.spec_cache_dir, exist_ok=True)
        for spec, p in zip(specs, paths):
            save_spec(spec, p)
    return specs


# ---- per-frame simulation ---------------------------------------------------


@dataclass(frozen=True)
class _PointTask:
    cfg: SimConfig
    esn0_db: float
    snr_key: str
    spec: object          # CodeSpec (bpsk) or list of 3 (qam64)


def _sim_frame_bpsk(task, frame_idx):
    cfg = task.cfg
    spec = task.spec
    rng = _stream(cfg.master_seed, task.snr_key, frame_idx)
    info = rng.integers(0, 2, cfg.k_info).astype(np.uint8)
    payload = crc_append(info, cfg.crc) if cfg.crc else info
    u = np.zeros(cfg.n, dtype=np.uint8)
    info_idx = spec.info_indices()
    u[info_idx] = payload
    c = encode_bmera(u) if cfg.family == "bmera" else encode_polar(u)
    sigma2 = esn0_db_to_sigma2(task.esn0_db)
    y = awgn_transmit(map_bpsk(c), sigma2, rng)
    prior = bpsk_posterior(y, sigma2)
    if cfg.decoder == "sc":
        res = (decode_sc if cfg.family == "bmera" else decode_polar_sc)(
            prior, spec.frozen)
        payload_hat = res.u_hat[info_idx]
    else:
        dec = decode_scl if cfg.family == "bmera" else decode_polar_scl
        res = dec(prior, spec.frozen, cfg.list_size, crc=cfg.crc)
        payload_hat = res.best.payload
    info_hat = payload_hat[:cfg.k_info]
    nbit = int(np.count_nonzero(info_hat != info))
    return nbit, int(nbit > 0)


def _sim_frame_qam(task, frame_idx):
    cfg = task.cfg
    specs = task.spec
    crcs = tuple([cfg.crc] * 3) if cfg.crc else (None, None, None)
    scheme = MlcScheme(levels=tuple(specs),
                       L=cfg.list_size if cfg.decoder == "scl" else 1,
                       crcs=crcs)
    rng = _stream(cfg.master_seed, task.snr_key, frame_idx)
    info = [rng.integers(0, 2, scheme.k_info(lev)).astype(np.uint8)
            for lev in range(3)]
    x, _ = mlc_encode(info, scheme)
    sigma2 = qam64_dim_sigma2(task.esn0_db)
    y = awgn_transmit(x, sigma2, rng)
    res = multistage_decode(y, scheme, sigma2)
    nbit = 0
    for lev in range(3):
        nbit += int(np.count_nonzero(res.info[lev] != info[lev]))
    return nbit, int(nbit > 0)


def _run_chunk(task, start, stop):
    sim = _sim_frame_bpsk if task.cfg.modulation == "bpsk" else _sim_frame_qam
    bit_err = np.zeros(stop - start, dtype=np.int64)
    frm_err = np.zeros(stop - start, dtype=np.int64)
    for i, f in enumerate(range(start, stop)):
        bit_err[i], frm_err[i] = sim(task, f)
    return bit_err, frm_err


@dataclass
class PointResult:
    snr_db: float
    convention: str
    esn0_db: float
    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    seconds: float
    spec_digest: str
    config_digest: str


def _workers():
    try:
        w = int(os.environ.get("BMERA_SIM_WORKERS", "1"))
    except ValueError:
        return 1
    return max(1, w)


def run_point(cfg, snr_db, log=None):
    """Simulate one SNR point; deterministic in (cfg, snr_db, master_seed)."""
    t0 = time.monotonic()
    esn0 = cfg.esn0_db(snr_db)
    spec = resolve_design(cfg, esn0)
    if cfg.modulation == "bpsk":
        digest = spec.digest()
    else:
        digest = hashlib.sha256("".join(s.digest() for s in spec).encode()) \
            .hexdigest()[:16]
    task = _PointTask(cfg=cfg, esn0_db=esn0, snr_key=f"snr{snr_db:.6f}",
                      spec=spec)

    frames = 0
    bit_errors = 0
    frame_errors = 0
    workers = _workers()
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        stopped = False
        next_frame = 0
        while not stopped and next_frame < cfg.max_frames:
            starts = []
            while len(starts) < max(workers, 1) and next_frame < cfg.max_frames:
                stop = min(next_frame + _CHUNK, cfg.max_frames)
                starts.append((next_frame, stop))
                next_frame = stop
            if pool is not None:
                results = list(pool.map(_run_chunk_star,
                                        [(task, a, b) for a, b in starts]))
            else:
                results = [_run_chunk(task, a, b) for a, b in starts]
            # commit in frame order, honoring the stopping rule exactly
            for (a, b), (bit_arr, frm_arr) in zip(starts, results):
                for i in range(b - a):
                    frames += 1
                    bit_errors += int(bit_arr[i])
                    frame_errors += int(frm_arr[i])
                    if frame_errors >= cfg.min_frame_errors:
                        stopped = True
                        break
                if stopped:
                    break
    finally:
        if pool is not None:
            pool.shutdown()

    seconds = time.monotonic() - t0
    k_info = cfg.k_info
    res = PointResult(
        snr_db=float(snr_db), convention=cfg.snr_convention, esn0_db=esn0,
        ebn0_db=esn0_to_ebn0_db(esn0, cfg.info_bits_per_symbol / cfg.bits_per_symbol,
                                cfg.bits_per_symbol),
        frames=frames, bit_errors=bit_errors, frame_errors=frame_errors,
        ber=bit_errors / (frames * k_info), fer=frame_errors / frames,
        seconds=seconds, spec_digest=digest, config_digest=cfg.digest())
    if log:
        print(f"[point] snr={snr_db:g} dB ({cfg.snr_convention}) "
              f"esn0={esn0:.3f} ebn0={res.ebn0_db:.3f} frames={frames} "
              f"fer={res.fer:.3e} ber={res.ber:.3e} wall={seconds:.1f}s",
              file=log, flush=True)
    return res


def _run_chunk_star(args):
    return _run_chunk(*args)


def sweep(cfg, log=None):
    """Run every SNR point and report FER monotonicity violations."""
    results = [run_point(cfg, s, log=log) for s in cfg.snr_db]
    if log:
        for a, b in zip(results, results[1:]):
            # 3-sigma binomial check that FER does not increase with SNR
            se = math.sqrt(max(a.fer * (1 - a.fer), 1e-12) / a.frames
                           + max(b.fer * (1 - b.fer), 1e-12) / b.frames)
            if b.fer > a.fer + 3 * se:
                print(f"[warn] FER increased from {a.snr_db:g} dB "
                      f"({a.fer:.3e}) to {b.snr_db:g} dB ({b.fer:.3e})",
                      file=log, flush=True)
    return results


def write_csv(cfg, results, out):
    """Deterministic CSV; see module docstring for the seconds column."""
    buf = io.StringIO()
    buf.write(f"# bmera simulation, config digest {cfg.digest()}\n")
    buf.write(f"# family={cfg.family} modulation={cfg.modulation} "
              f"decoder={cfg.decoder} n={cfg.n} k={cfg.k} "
              f"k_info={cfg.k_info} L={cfg.list_size} crc_bits={cfg.crc_bits} "
              f"crc_poly=0x{cfg.crc_poly:02x}\n")
    buf.write("# noise: N0/2 per real dimension; sigma2 = 1/(2*EsN0_lin)\n")
    buf.write(f"# ebn0_db = esn0_db - "
              f"{10 * math.log10(cfg.info_bits_per_symbol):.6f}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in results:
        buf.write(f"{r.snr_db:g},{r.convention},{r.frames},{r.bit_errors},"
                  f"{r.frame_errors},{r.ber!r},{r.fer!r},0.000,{r.spec_digest}\n")
    text = buf.getvalue()
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w") as f:
            f.write(text)
    return text
