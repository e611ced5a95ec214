"""Hybrid PLC/wireless OFDM link simulation.

Soft-value combining of a narrowband powerline link and a wireless link
carrying the same bits, under impulsive and cyclostationary noise.
"""

from .channel import ChannelRealization, plc_channel, rayleigh_block
from .combining import LlrFrame
from .config import load_scenario, parse_scenario
from .errors import (ConfigurationError, DomainError, FramingError, HybridLinkError,
                     PreconditionError)
from .fec import BlockInterleaver, CodeConfig, conv_encode, viterbi_decode
from .noise import AwgnNoise, CycloNoise, CycloParams, GmNoise, GmParams, NoiseRegion
from .ofdm import DiffMode, OfdmConfig, demodulate, modulate
from .simulator import (BerPoint, ChannelSpec, LinkConfig, Modulation, Receiver,
                        Scenario, Scheme, report, run_sweep, run_trial)
from .sync import PreambleSpec, SyncThresholds, gen_preamble, hybrid_detect

__version__ = "0.1.0"
