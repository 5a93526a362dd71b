"""Partitioned SCL-flip decoding of CRC-aided polar codes."""

from .channel import frame_rng, modulate, noise_variance, transmit
from .crc import CrcSpec, allocate_crc_structure, crc_append, crc_check, crc_specs_for
from .design import (EmpiricalCdf, design_partitions, design_partitions_uniform,
                     estimate_first_error_cdf, load_cdf, partition_error_probs, save_cdf)
from .flip import (DecodeOutcome, FlipConfig, ascl_decode, build_flip_set,
                   compute_flip_metric, psclf_decode, scf_decode, scl_decode, sclf_decode)
from .frames import draw_frame
from .polar_code import PartitionSpec, PolarCode, encode, extract_message, insert_message
from .scl import SclDecoder, sc_decode, select_output

__version__ = "0.1.0"
