"""Coherent decoy states against the PNS attack, and the comparison with the ancilla.

Alice mixes two intensities. Whole-pulse loss leaves the class shares Bob
receives unchanged, but a PNS adversary forwards every multi-photon pulse
and blocks singles, so the higher-intensity class gains share. Detecting
that shift is a Bernoulli test on the class label of each received pulse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .channel import ChannelConfig, EveStrategy, transmit
from .ee import MIDDLE_PROBABILITY, Decision, ancilla_hypotheses
from .errors import DegenerateError, DomainError
from .rng import Streams, as_streams
from .sources import (
    LAUNCH_PROBABILITY,
    DecoyIntensityConfig,
    SourceClass,
    emit_decoy_batch,
    multi_photon_probability,
    poisson_pmf,
)
from .stats import BernoulliHypothesisPair, Hypothesis, decide_hypothesis, trials_needed


@dataclass(frozen=True)
class DecoyScenario:
    intensities: DecoyIntensityConfig = DecoyIntensityConfig()
    loss: float = 0.5
    confidence: float = 0.99

    def __post_init__(self):
        if not 0.0 <= self.loss < 1.0:
            raise DomainError(f"loss must lie in [0, 1), got {self.loss!r}")
        if not 0.5 < self.confidence < 1.0:
            raise DomainError(f"confidence must lie in (0.5, 1), got {self.confidence!r}")


@dataclass(frozen=True)
class DecoyComparisonPoint:
    loss: float
    pulses_sent_decoy: int
    pulses_sent_ee: Mapping[float, int]
    ratio: Mapping[float, float]


@dataclass(frozen=True)
class _ClassRates:
    """Per-pulse probabilities of each (class, photon-number group)."""

    single1: float
    multi1: float
    single2: float
    multi2: float

    @classmethod
    def of(cls, cfg: DecoyIntensityConfig) -> "_ClassRates":
        f1, f2 = cfg.fraction1, cfg.fraction2
        return cls(
            f1 * poisson_pmf(1, cfg.mu1),
            f1 * multi_photon_probability(cfg.mu1),
            f2 * poisson_pmf(1, cfg.mu2),
            f2 * multi_photon_probability(cfg.mu2),
        )

    @property
    def nonvacuum(self) -> float:
        return self.single1 + self.multi1 + self.single2 + self.multi2


def nonvacuum_probability(cfg: DecoyIntensityConfig) -> float:
    return cfg.fraction1 * -math.expm1(-cfg.mu1) + cfg.fraction2 * -math.expm1(-cfg.mu2)


def null_fraction(cfg: DecoyIntensityConfig) -> float:
    """Class-1 share among nonvacuum pulses with no eavesdropper (any loss)."""
    nv = nonvacuum_probability(cfg)
    if nv == 0.0:
        raise DegenerateError("both intensities are zero; nothing is ever received")
    return cfg.fraction1 * -math.expm1(-cfg.mu1) / nv


def attack_fraction_oracle(cfg: DecoyIntensityConfig, loss: float) -> float:
    """Expected class-1 share among pulses a PNS adversary forwards.

    Eve passes multi-photon pulses, then fills the remaining budget of
    ``(1 - loss)`` times the nonvacuum rate with single-photon pulses chosen
    without regard to class. If the multi-photon pulses alone exceed the
    budget she blocks them in proportion and forwards no singles.
    """
    loss = float(loss)
    if not 0.0 <= loss <= 1.0:
        raise DomainError(f"loss must lie in [0, 1], got {loss!r}")
    r = _ClassRates.of(cfg)
    budget = (1.0 - loss) * r.nonvacuum
    if budget <= 0.0:
        raise DegenerateError("Eve forwards nothing: zero transmission budget")
    multi = r.multi1 + r.multi2
    if multi <= budget:
        singles = r.single1 + r.single2
        pass_single = (budget - multi) / singles if singles > 0.0 else 0.0
        return (r.multi1 + r.single1 * pass_single) / budget
    return r.multi1 / multi


def decoy_hypotheses(cfg: DecoyIntensityConfig, loss: float) -> BernoulliHypothesisPair:
    return BernoulliHypothesisPair(null_fraction(cfg), attack_fraction_oracle(cfg, loss))


def decoy_pulses_needed(scn: DecoyScenario) -> int:
    """Pulses Alice must send for the received-share test to reach the confidence.

    Raises :class:`~qkdlab.errors.UnreachableError` when the attack leaves the shares unchanged.
    """
    h = decoy_hypotheses(scn.intensities, scn.loss)
    received = trials_needed(h, 1.0 - scn.confidence)
    per_pulse = (1.0 - scn.loss) * nonvacuum_probability(scn.intensities)
    return math.ceil(received / per_pulse)


def ee_pulses_needed(dephasing: float, loss: float, confidence: float) -> int:
    """Ancilla pulses Alice must generate to collect the planned middle-bin clicks.

    Each generated photon is launched with probability 1/2, survives the line
    with probability ``1 - loss`` and lands in the middle time bin with
    probability 1/2.
    """
    if not 0.0 <= loss < 1.0:
        raise DomainError(f"loss must lie in [0, 1), got {loss!r}")
    if not 0.0 <= dephasing < 0.5:
        raise DomainError(f"dephasing must lie in [0, 0.5), got {dephasing!r}")
    trials = trials_needed(ancilla_hypotheses(dephasing), 1.0 - confidence)
    return math.ceil(trials / ((1.0 - loss) * MIDDLE_PROBABILITY * LAUNCH_PROBABILITY))


def comparison_curve(
    loss_grid: Iterable[float],
    ee_dephasing_levels: Iterable[float],
    template: DecoyScenario = DecoyScenario(),
) -> list[DecoyComparisonPoint]:
    levels = [float(d) for d in ee_dephasing_levels]
    points = []
    for loss in sorted(float(x) for x in loss_grid):
        scn = DecoyScenario(template.intensities, loss, template.confidence)
        decoy = decoy_pulses_needed(scn)
        ee = {d: ee_pulses_needed(d, loss, template.confidence) for d in levels}
        points.append(DecoyComparisonPoint(loss, decoy, ee, {d: ee[d] / decoy for d in levels}))
    return points


def crossover_loss(points: Iterable[DecoyComparisonPoint], dephasing: float) -> float | None:
    """Smallest grid loss at which decoy states need fewer pulses than the ancilla."""
    for pt in points:
        if pt.pulses_sent_decoy < pt.pulses_sent_ee[dephasing]:
            return pt.loss
    return None


@dataclass
class DecoyRunReport:
    pulses_sent: int
    received_pulses: int
    class1_share: float
    null_share: float
    attack_share: float
    trials_needed: int
    trials_used: int
    decision: Decision


def run_decoy_detection(
    cfg: DecoyIntensityConfig,
    n_pulses: int,
    channel: ChannelConfig,
    eve: EveStrategy,
    confidence: float,
    rng: "Streams | np.random.Generator | int",
) -> DecoyRunReport:
    """Send ``n_pulses`` decoy-source pulses and test the received class shares.

    The test plan assumes the worst case where Eve counterfeits the whole
    channel loss. The first ``trials_needed`` received pulses are used.
    """
    if n_pulses < 1:
        raise DomainError("n_pulses must be positive")
    s = as_streams(rng)
    h = decoy_hypotheses(cfg, channel.loss)
    need = trials_needed(h, 1.0 - confidence)
    sent = emit_decoy_batch(cfg, n_pulses, s.source)
    at_bob, arrived, _ = transmit(sent, channel, eve, s.channel, s.eve)
    received = np.flatnonzero(arrived & (at_bob.photon_count > 0))
    is1 = sent.source_class[received] == SourceClass.DECOY_1
    share = float(np.mean(is1)) if received.size else float("nan")
    used = min(need, int(received.size))
    decision = Decision.INCONCLUSIVE
    if used == need:
        verdict = decide_hypothesis(int(np.count_nonzero(is1[:need])), need, h)
        decision = Decision.NO_EAVESDROPPER if verdict is Hypothesis.NULL else Decision.EAVESDROPPER_DETECTED
    return DecoyRunReport(n_pulses, int(received.size), share, h.p, h.q, need, used, decision)
