"""Layered decoder model for protograph-based LDPC-Hadamard codes.

Provides the double-lifted quasi-cyclic construction, floating-point and
bit-accurate fixed-point layered decoding with symbol-MAP Hadamard check
updates, a cycle-accurate model of the RAM/pipeline hardware architecture,
and a seeded Monte Carlo BER/FER harness with a CLI front end.
"""

from .campaign import CampaignConfig, TrialResult, run_campaign
from .channel import ChannelConfig, modulate_and_transmit
from .construction import (
    DEFAULT_BASE,
    BaseMatrix,
    LayerView,
    LiftedCode,
    Stage1Lift,
    build_code,
    code_rate,
    layer_view,
    lift_stage1,
    lift_stage2,
    load_code,
    save_code,
)
from .decoder import DecodeResult, DecoderState, LayeredDecoder
from .encoder import FrameEncoder, RankDeficiencyError
from .hadamard import (
    FixedKernel,
    HadamardContext,
    HadamardLLRFrame,
    dfht,
    fht,
    hadamard_encode,
    hadamard_matrix,
    max_star,
    spc_positions,
    symbol_map_decode,
)
from .quantize import (
    QFormat,
    QuantProfile,
    get_profile,
    load_profile,
    profile_s1,
    profile_s2,
    profile_s3,
    profile_wide,
    quantize,
    save_profile,
)
from .timing import (
    ArchConfig,
    RamBankModel,
    ScheduleReport,
    apply_interleave,
    classify_case,
    codeword_latency_and_throughput,
    d1h_address,
    hex_address,
    layer_latency,
    pvn_address,
    ram_banks,
    shift_amount,
    simulate_schedule,
    timing_rows,
)

__version__ = "0.1.0"
