"""BB84 under the photon-number-splitting attack.

Entangled time-bin ancilla versus coherent decoy states, with Chernoff
distance planning of how many trials expose the eavesdropper.
"""
from ._kernels import BACKEND
from .channel import AttackLedger, ChannelConfig, EveKind, EveStrategy, eve_decoy_fractions, eve_process_stream
from .decoy import DecoyScenario, attack_fraction_oracle, comparison_curve, decoy_pulses_needed
from .ee import ModeSchedule, detect_eavesdropper, run_bb84_exchange, trials_vs_dephasing_curve
from .errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    PerfectlyDistinguishableError,
    QkdlabError,
    UnreachableError,
)
from .sources import DecoyIntensityConfig, PulseBatch, PulseRecord, WlpSourceConfig, multi_photon_probability
from .stats import (
    BernoulliHypothesisPair,
    Hypothesis,
    chernoff_distance,
    decide_hypothesis,
    max_error_probability,
    trials_needed,
)

__version__ = "0.1.0"
