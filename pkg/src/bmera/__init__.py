"""Convolutional polar (BMERA) and polar codes over AWGN.

Encoding, successive-cancellation (list) decoding via 3-bit channels,
CRC-aided selection, frozen-set construction, multilevel 64-QAM coded
modulation, and a reproducible Monte-Carlo simulation CLI.
"""

from .construction import (CodeSpec, design_bmera_bec, design_mc_genie,
                           design_mlc, design_polar_ga, epsilon_for_level,
                           freeze, load_spec, save_spec)
from .crc import CRC8_DEFAULT, CrcConfig, crc_append, crc_check
from .gf2 import (bit_reversal_perm, bmera_generator, encode_bmera,
                  encode_polar, kernel_f, polar_generator, shift_matrix)
from .mlc import MlcScheme, mlc_encode, multistage_decode
from .modem import (AwgnChannel, BecChannel, Constellation, awgn_transmit,
                    bec_transmit, bpsk_posterior, demap_bit_level, map_ask8,
                    map_bpsk, qam64_map)
from .polar import decode_polar_sc, decode_polar_scl
from .sc import DecodeError, DecoderState, decode_sc
from .scl import crc_select, decode_scl
from .sim import SimConfig, parse_config, run_point, sweep, write_csv

__version__ = "0.1.0"
