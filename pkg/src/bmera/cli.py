"""Command-line interface: construct / simulate / codec / show-spec.

Noise convention used throughout: N0/2 per real dimension, i.e.
sigma^2 = 1/(2 * Es/N0_lin) for the unit-energy constellations; CSV
reports the configured SNR convention and the header carries the
Es/N0 <-> Eb/N0 offset.
"""

import argparse
import sys
from importlib import resources

import numpy as np

from .construction import (bec_surrogate_eps_bpsk, design_bmera_bec,
                           design_mc_genie, design_polar_ga, freeze,
                           load_spec, save_spec)
from .gf2 import as_bits
from .modem import AwgnChannel, BecChannel, esn0_db_to_sigma2
from .polar import decode_polar_sc
from .sc import decode_sc
from .sim import ConfigError, parse_config, sweep, write_csv

PRESETS = ("fig2", "fig2_crc", "fig2_smoke", "fig2_smoke_crc", "fig3", "fig3_smoke")


def _preset_text(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("bmera").joinpath(f"presets/{name}.cfg").read_text()


def _cmd_construct(args):
    if args.method == "ga":
        if args.family != "polar":
            raise ConfigError("config key 'method': ga designs polar codes only")
        spec = design_polar_ga(args.n, args.k, args.param)
    elif args.method == "bec-surrogate":
        if args.family != "bmera":
            raise ConfigError("config key 'method': bec-surrogate designs bmera codes")
        eps = bec_surrogate_eps_bpsk(args.param)
        spec = design_bmera_bec(args.n, args.k, eps, args.frames,
                                np.random.default_rng(args.seed),
                                seed_label=str(args.seed))
    else:
        channel = (BecChannel(args.param) if args.method == "genie-bec"
                   else AwgnChannel(esn0_db_to_sigma2(args.param)))
        profile = design_mc_genie(args.family, channel, args.n, args.frames,
                                  np.random.default_rng(args.seed))
        spec = freeze(profile, args.k, family=args.family, design={
            "method": "mc-genie",
            "channel": "bec" if args.method == "genie-bec" else "biawgn",
            "param": float(args.param),
            "frames": int(args.frames),
            "seed": int(args.seed),
        })
    save_spec(spec, args.out)
    print(f"wrote {args.out} (digest {spec.digest()})")


def _read_bits(path):
    with open(path) as f:
        text = "".join(f.read().split())
    return as_bits([int(ch) for ch in text])


def _write_bits(path, bits):
    with open(path, "w") as f:
        f.write("".join(str(int(b)) for b in bits))
        f.write("\n")


def _cmd_codec(args):
    spec = load_spec(args.spec)
    if args.action == "encode":
        info = _read_bits(args.infile)
        if info.size != spec.k:
            raise ConfigError(f"config key 'infile': expected {spec.k} payload bits, "
                              f"got {info.size}")
        u = np.zeros(spec.n, dtype=np.uint8)
        u[spec.info_indices()] = info
        _write_bits(args.outfile, spec.encode(u))
        print(f"encoded {spec.k} bits -> {spec.n} bits")
    else:
        c = _read_bits(args.infile)
        if c.size != spec.n:
            raise ConfigError(f"config key 'infile': expected {spec.n} codeword bits, "
                              f"got {c.size}")
        prior = np.zeros((spec.n, 2))
        prior[np.arange(spec.n), c] = 1.0
        dec = decode_sc if spec.family == "bmera" else decode_polar_sc
        res = dec(prior, spec.frozen)
        _write_bits(args.outfile, res.u_hat[spec.info_indices()])
        print(f"decoded {spec.n} bits -> {spec.k} bits")


def _cmd_show_spec(args):
    spec = load_spec(args.spec)
    print(f"family : {spec.family}")
    print(f"n      : {spec.n}")
    print(f"k      : {spec.k}  (rate {spec.k / spec.n:.4f})")
    print(f"digest : {spec.digest()}")
    print(f"design : {spec.design}")
    frozen = list(spec.frozen)
    print(f"frozen ({len(frozen)}): {frozen}")


def _cmd_simulate(args):
    if args.preset:
        text = _preset_text(args.preset)
    else:
        if not args.config:
            raise ConfigError("config key 'config': give a config file or --preset")
        with open(args.config) as f:
            text = f.read()
    cfg = parse_config(text)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, master_seed=args.seed)
    results = sweep(cfg, log=sys.stderr)
    out = sys.stdout if args.out == "-" else args.out
    write_csv(cfg, results, out)
    if args.out != "-":
        print(f"wrote {args.out}", file=sys.stderr)


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="bmera",
        description="Convolutional polar (BMERA) and polar codes: "
                    "construction, codec, and Monte-Carlo simulation.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="design a code and write a spec file")
    c.add_argument("--family", choices=("polar", "bmera"), required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--method", required=True,
                   choices=("genie-bec", "genie-awgn", "ga", "bec-surrogate"))
    c.add_argument("--param", type=float, required=True,
                   help="erasure probability (genie-bec) or Es/N0 dB (others)")
    c.add_argument("--frames", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=_cmd_construct)

    s = sub.add_parser("simulate", help="run a Monte-Carlo sweep, emit CSV")
    s.add_argument("config", nargs="?", help="config file path")
    s.add_argument("--preset", choices=PRESETS)
    s.add_argument("--seed", type=int, help="override master_seed")
    s.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    s.set_defaults(func=_cmd_simulate)

    d = sub.add_parser("codec", help="encode/decode single frames (bit files)")
    d.add_argument("action", choices=("encode", "decode"))
    d.add_argument("--spec", required=True)
    d.add_argument("--infile", required=True)
    d.add_argument("--outfile", required=True)
    d.set_defaults(func=_cmd_codec)

    p = sub.add_parser("show-spec", help="pretty-print a code spec file")
    p.add_argument("spec")
    p.set_defaults(func=_cmd_show_spec)

    args = ap.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
