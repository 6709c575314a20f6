"""Encoded quantum repeater model: codes, error budgets, chain formulas,
purification yield and a Monte Carlo cross-check."""

from .chain import (
    chain_fidelity,
    chain_report,
    key_correlation,
    logical_error_prob,
    logical_error_prob_asymptotic,
    max_connections,
    table1_report,
    threshold_scan,
)
from .codes import (
    CssCodeSpec,
    StabilizerFrame,
    UnknownCodeError,
    UnsupportedDecoderError,
    build_code,
    decode_block,
    registry,
    resource_estimate,
    stabilizer_cnot_update,
)
from .errors import ErrorParams, effective_error_probabilities, memory_error_prob
from .mcsim import ChainConfig, SimOutcome, exact_chain_error, simulate_chain
from .purification import (
    BellDiagState,
    LinkParams,
    cycle_time,
    failure_probability,
    generation_rate,
    key_rate,
    number_distribution,
    purification_schedule,
    purify_step,
    required_pairs,
)

__version__ = "0.1.0"
