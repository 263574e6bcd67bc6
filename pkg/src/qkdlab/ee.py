"""Entanglement-enhanced BB84: weak-pulse key exchange plus a time-bin ancilla.

In each time slot Alice and Bob independently pick a signal or decoy
mode. Alice's decoy mode launches a heralded single photon in an early/late
superposition. Bob's decoy mode sends it through an interferometer matched
to Alice's; of the four path combinations only the middle time bin
(short-long and long-short together) interferes, so a click in the dark
port of that bin is evidence of a number measurement on the line.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .channel import AttackLedger, ChannelConfig, EveStrategy, transmit
from .errors import DomainError
from .rng import Streams, as_streams
from .sources import (
    PulseBatch,
    PulseRecord,
    TimeBin,
    WlpSourceConfig,
    emit_ancilla_batch,
    emit_wlp_batch,
)
from .stats import BernoulliHypothesisPair, Hypothesis, chernoff_distance, decide_hypothesis, trials_needed

# balanced splitters in both labs
PATH_PROBABILITIES = {"SS": 0.25, "LL": 0.25, "MIDDLE": 0.5}
MIDDLE_PROBABILITY = PATH_PROBABILITIES["MIDDLE"]


class Mode(enum.Enum):
    SIGNAL = "signal"
    DECOY = "decoy"


class SlotCategory(enum.Enum):
    KEY_EXCHANGE = "key"
    DECOY_DETECTION = "decoy"
    WASTED = "wasted"


class InterferometerOutcome(enum.IntEnum):
    SS = _kernels.OUT_SS
    LL = _kernels.OUT_LL
    MIDDLE_BRIGHT = _kernels.OUT_BRIGHT
    MIDDLE_DARK = _kernels.OUT_DARK
    LOST = 4

    @property
    def is_middle(self) -> bool:
        return self in (InterferometerOutcome.MIDDLE_BRIGHT, InterferometerOutcome.MIDDLE_DARK)


class KeyDetail(enum.IntEnum):
    LOST = _kernels.SIFT_LOST
    BASIS_MISMATCH = _kernels.SIFT_MISMATCH
    SIFTED_BIT = _kernels.SIFT_MATCH


class Decision(enum.Enum):
    NO_EAVESDROPPER = "no_eavesdropper"
    EAVESDROPPER_DETECTED = "eavesdropper_detected"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ModeSchedule:
    """Decoy-mode frequencies for Alice (``f_da``) and Bob (``f_db``).

    Signal frequencies are the complements. Values are kept as given, so
    passing :class:`fractions.Fraction` keeps the algebra exact.
    """

    f_da: float = 0.0
    f_db: float = 0.0

    def __post_init__(self):
        for name in ("f_da", "f_db"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")

    @classmethod
    def from_frequencies(cls, f_sa, f_da, f_sb, f_db) -> "ModeSchedule":
        if not (math.isclose(f_sa + f_da, 1.0, abs_tol=1e-12) and math.isclose(f_sb + f_db, 1.0, abs_tol=1e-12)):
            raise DomainError("each party's signal and decoy frequencies must sum to 1")
        return cls(f_da, f_db)

    @property
    def f_sa(self):
        return 1 - self.f_da

    @property
    def f_sb(self):
        return 1 - self.f_db

    def category_frequencies(self) -> dict[SlotCategory, float]:
        return {
            SlotCategory.KEY_EXCHANGE: self.f_sa * self.f_sb + self.f_da * self.f_sb,
            SlotCategory.DECOY_DETECTION: self.f_da * self.f_db,
            SlotCategory.WASTED: self.f_sa * self.f_db,
        }


@dataclass(frozen=True)
class SlotOutcome:
    category: SlotCategory
    detail: InterferometerOutcome | KeyDetail | None = None
    bit: int | None = None


@dataclass
class DetectionReport:
    middle_bright: int = 0
    middle_dark: int = 0
    ss: int = 0
    ll: int = 0
    chernoff: float = 0.0
    trials_needed: int = 0
    decision: Decision = Decision.INCONCLUSIVE

    @property
    def trials_used(self) -> int:
        return self.middle_bright + self.middle_dark


def classify_slot(alice_mode: Mode, bob_mode: Mode) -> SlotCategory:
    if bob_mode is Mode.SIGNAL:
        # a decoy photon still carries polarisation, so it yields a key bit
        return SlotCategory.KEY_EXCHANGE
    if alice_mode is Mode.DECOY:
        return SlotCategory.DECOY_DETECTION
    return SlotCategory.WASTED


def interferometer_outcome(
    pulse: PulseRecord, eve_collapsed: bool, rng: np.random.Generator
) -> InterferometerOutcome:
    """Which time bin and port Bob's click lands in for one ancilla photon."""
    if not pulse.is_ancilla or pulse.photon_count != 1:
        raise DomainError("interferometer_outcome needs a surviving single-photon ancilla pulse")
    collapsed = eve_collapsed or pulse.timebin.collapsed
    u = rng.random(2)
    code = _kernels.interferometer_numpy(
        np.array([pulse.coherence]), np.array([collapsed]), u[:1], u[1:]
    )[0]
    return InterferometerOutcome(int(code))


def interferometer_batch(batch: PulseBatch, rng: np.random.Generator) -> np.ndarray:
    """Outcome codes (see :class:`InterferometerOutcome`) for every row of ``batch``."""
    n = len(batch)
    u_path = rng.random(n)
    u_port = rng.random(n)
    collapsed = (batch.timebin == TimeBin.EARLY) | (batch.timebin == TimeBin.LATE)
    return _kernels.interferometer(batch.coherence, collapsed, u_path, u_port)


@dataclass
class ExchangeStats:
    n_slots: int
    key_slots: int
    decoy_slots: int
    wasted_slots: int
    received_pulses: int
    detected_key_slots: int
    sifted_length: int
    qber: float
    eve_known_fraction: float
    middle_bright: int
    middle_dark: int
    ss: int
    ll: int
    # sifted outcomes at Bob, indexed [basis][bit]
    bob_outcome_counts: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), dtype=np.int64))


@dataclass
class ExchangeResult:
    sifted_key_a: np.ndarray
    sifted_key_b: np.ndarray
    stats: ExchangeStats
    alice_decoy: np.ndarray
    bob_decoy: np.ndarray
    detail: np.ndarray
    bob_bit: np.ndarray
    decoy_events: np.ndarray
    ledger: AttackLedger | None

    def slot_outcome(self, i: int) -> SlotOutcome:
        alice = Mode.DECOY if self.alice_decoy[i] else Mode.SIGNAL
        bob = Mode.DECOY if self.bob_decoy[i] else Mode.SIGNAL
        cat = classify_slot(alice, bob)
        if cat is SlotCategory.WASTED:
            return SlotOutcome(cat)
        if cat is SlotCategory.DECOY_DETECTION:
            return SlotOutcome(cat, InterferometerOutcome(int(self.detail[i])))
        detail = KeyDetail(int(self.detail[i]))
        bit = int(self.bob_bit[i]) if detail is KeyDetail.SIFTED_BIT else None
        return SlotOutcome(cat, detail, bit)


def _mix(alice_decoy: np.ndarray, decoy: PulseBatch, signal: PulseBatch) -> PulseBatch:
    cols = ("source_class", "photon_count", "polarization", "timebin", "coherence", "emission_time", "mu")
    return PulseBatch(*(np.where(alice_decoy, getattr(decoy, c), getattr(signal, c)) for c in cols))


def run_bb84_exchange(
    n_slots: int,
    source: WlpSourceConfig,
    schedule: ModeSchedule,
    channel: ChannelConfig,
    eve: EveStrategy,
    rng: "Streams | np.random.Generator | int",
) -> ExchangeResult:
    """Simulate ``n_slots`` time slots of the mixed signal/ancilla protocol.

    Every stream draws a full-length array up front, so results do not
    depend on the order in which slots are examined.
    """
    if n_slots < 1:
        raise DomainError("n_slots must be positive")
    s = as_streams(rng)
    alice_decoy = s.schedule.random(n_slots) < float(schedule.f_da)
    bob_decoy = s.schedule.random(n_slots) < float(schedule.f_db)
    signal = emit_wlp_batch(source, n_slots, s.source)
    ancilla = emit_ancilla_batch(n_slots, s.source)
    sent = _mix(alice_decoy, ancilla, signal)

    at_bob, arrived, ledger = transmit(sent, channel, eve, s.channel, s.eve)
    detected = arrived & (at_bob.photon_count > 0)

    bob_basis = s.bob.integers(0, 2, size=n_slots, dtype=np.int8)
    interf = interferometer_batch(at_bob, s.bob)

    key = ~bob_decoy
    decoy_det = alice_decoy & bob_decoy
    sift_code, bob_bit = _kernels.sift(sent.polarization, bob_basis, detected)
    detail = np.where(key, sift_code, np.where(detected, interf, InterferometerOutcome.LOST)).astype(np.int8)
    detail[~key & ~alice_decoy] = -1

    sifted = key & (detail == KeyDetail.SIFTED_BIT)
    key_a = (sent.polarization[sifted] & 1).astype(np.int8)
    key_b = bob_bit[sifted]
    n_sifted = int(key_a.size)
    qber = float(np.mean(key_a != key_b)) if n_sifted else math.nan
    if ledger is not None and n_sifted:
        known = float(np.mean(np.isin(np.flatnonzero(sifted), ledger.known_bit_indices)))
    else:
        known = 0.0

    counts = np.zeros((2, 2), dtype=np.int64)
    np.add.at(counts, (bob_basis[sifted], key_b), 1)
    events = detail[decoy_det]
    stats = ExchangeStats(
        n_slots=n_slots,
        key_slots=int(np.count_nonzero(key)),
        decoy_slots=int(np.count_nonzero(decoy_det)),
        wasted_slots=int(np.count_nonzero(bob_decoy & ~alice_decoy)),
        received_pulses=int(np.count_nonzero(detected)),
        detected_key_slots=int(np.count_nonzero(key & detected)),
        sifted_length=n_sifted,
        qber=qber,
        eve_known_fraction=known,
        middle_bright=int(np.count_nonzero(events == InterferometerOutcome.MIDDLE_BRIGHT)),
        middle_dark=int(np.count_nonzero(events == InterferometerOutcome.MIDDLE_DARK)),
        ss=int(np.count_nonzero(events == InterferometerOutcome.SS)),
        ll=int(np.count_nonzero(events == InterferometerOutcome.LL)),
        bob_outcome_counts=counts,
    )
    return ExchangeResult(key_a, key_b, stats, alice_decoy, bob_decoy, detail, bob_bit, events, ledger)


def ancilla_hypotheses(dephasing: float) -> BernoulliHypothesisPair:
    """Bright-port probability without Eve (1 - d) against with Eve (1/2)."""
    return BernoulliHypothesisPair(1.0 - dephasing, 0.5)


def _check_confidence(confidence: float) -> float:
    confidence = float(confidence)
    if not 0.5 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0.5, 1), got {confidence!r}")
    return confidence


def detect_eavesdropper(events: Iterable, channel: ChannelConfig, confidence: float) -> DetectionReport:
    """Fixed-sample test on the middle-bin clicks of an outcome stream.

    Consumes ``events`` until the planned number of middle-bin clicks has
    been seen; SS/LL clicks are tallied but carry no evidence.
    """
    confidence = _check_confidence(confidence)
    h = ancilla_hypotheses(channel.dephasing)
    need = trials_needed(h, 1.0 - confidence)
    report = DetectionReport(chernoff=chernoff_distance(h), trials_needed=need)
    for e in events:
        e = InterferometerOutcome(int(e))
        if e is InterferometerOutcome.MIDDLE_BRIGHT:
            report.middle_bright += 1
        elif e is InterferometerOutcome.MIDDLE_DARK:
            report.middle_dark += 1
        elif e is InterferometerOutcome.SS:
            report.ss += 1
        elif e is InterferometerOutcome.LL:
            report.ll += 1
        if report.trials_used == need:
            verdict = decide_hypothesis(report.middle_bright, need, h)
            report.decision = (
                Decision.NO_EAVESDROPPER if verdict is Hypothesis.NULL else Decision.EAVESDROPPER_DETECTED
            )
            break
    return report


def trials_vs_dephasing_curve(d_grid: Iterable[float], confidence: float) -> list[tuple[float, int]]:
    confidence = _check_confidence(confidence)
    rows = []
    for d in d_grid:
        d = float(d)
        if not 0.0 <= d < 0.5:
            raise DomainError(f"dephasing must lie in [0, 0.5), got {d!r}")
        rows.append((d, trials_needed(ancilla_hypotheses(d), 1.0 - confidence)))
    return rows
