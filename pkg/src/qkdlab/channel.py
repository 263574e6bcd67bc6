"""Quantum channel effects and the photon-number-splitting eavesdropper.

Loss removes whole pulses. Dephasing acts only on time-bin ancillas and
sets the probability ``d`` that an undisturbed photon lands in Bob's dark
port. The PNS adversary replaces the line with a lossless one, reads every
photon number with a QND measurement, keeps one photon of each multi-photon
pulse, and blocks single-photon pulses at random so that Bob sees the loss
he expects.
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateError, DomainError
from .sources import (
    DecoyIntensityConfig,
    PulseBatch,
    PulseRecord,
    SourceClass,
    TimeBin,
    emit_decoy_batch,
)


@dataclass(frozen=True)
class ChannelConfig:
    loss: float = 0.0
    dephasing: float = 0.0

    def __post_init__(self):
        loss, d = float(self.loss), float(self.dephasing)
        if not 0.0 <= loss <= 1.0:
            raise DomainError(f"loss must lie in [0, 1], got {loss!r}")
        if not 0.0 <= d <= 0.5:
            raise DomainError(f"dephasing must lie in [0, 0.5], got {d!r}")
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "dephasing", d)

    @property
    def transmittivity(self) -> float:
        return 1.0 - self.loss


class EveKind(enum.Enum):
    ABSENT = "absent"
    PNS_QND = "pns_qnd"


@dataclass(frozen=True)
class EveStrategy:
    """What sits on the line. ``replaced_loss`` is the loss Eve counterfeits."""

    kind: EveKind = EveKind.ABSENT
    replaced_loss: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", EveKind(self.kind))
        if not 0.0 <= float(self.replaced_loss) <= 1.0:
            raise DomainError(f"replaced_loss must lie in [0, 1], got {self.replaced_loss!r}")
        object.__setattr__(self, "replaced_loss", float(self.replaced_loss))

    @classmethod
    def pns(cls, loss: float) -> "EveStrategy":
        return cls(EveKind.PNS_QND, loss)

    @property
    def present(self) -> bool:
        return self.kind is not EveKind.ABSENT


@dataclass
class AttackLedger:
    """Eve's bookkeeping; ``known_bit_indices`` are stream positions of split pulses."""

    pulses_seen: int = 0
    pulses_blocked: int = 0
    pulses_split: int = 0
    photons_stored: int = 0
    known_bit_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def pulses_forwarded(self) -> int:
        return self.pulses_seen - self.pulses_blocked


def apply_loss(pulse: PulseRecord, cfg: ChannelConfig, rng: np.random.Generator) -> PulseRecord | None:
    """Return the pulse, or ``None`` when the whole pulse is lost."""
    return None if rng.random() < cfg.loss else pulse


def survival_mask(n: int, cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.random(n) >= cfg.loss


def _dephased_coherence(cfg: ChannelConfig) -> float:
    # dark-port probability d  <=>  bright probability (1 + coherence) / 2 = 1 - d
    return 1.0 - 2.0 * cfg.dephasing


def apply_dephasing(pulse: PulseRecord, cfg: ChannelConfig) -> PulseRecord:
    if pulse.timebin is not TimeBin.SUPERPOSED:
        return pulse
    return dataclasses.replace(pulse, coherence=_dephased_coherence(cfg))


def dephase_batch(batch: PulseBatch, cfg: ChannelConfig) -> PulseBatch:
    out = batch.copy()
    sup = out.timebin == TimeBin.SUPERPOSED
    out.coherence[sup] = _dephased_coherence(cfg)
    return out


def blocking_probabilities(n_single: int, n_multi: int, replaced_loss: float) -> tuple[float, float]:
    """Per-pulse block probabilities (singles, multis) that meet the forward target.

    The target is ``(1 - replaced_loss)`` times the nonvacuum count. Singles
    are blocked first; multis only when they alone exceed the target.
    """
    target = (1.0 - replaced_loss) * (n_single + n_multi)
    if n_multi <= target:
        if n_single == 0:
            return 0.0, 0.0
        return (n_single + n_multi - target) / n_single, 0.0
    return 1.0, 1.0 - target / n_multi


def eve_process_stream(pulses, strategy: EveStrategy, rng: np.random.Generator):
    """Run the PNS/QND attack over a pulse stream.

    ``pulses`` may be a :class:`PulseBatch` or a sequence of
    :class:`PulseRecord`. For a batch the result is ``(batch_out, forwarded,
    ledger)`` where ``forwarded`` is a boolean mask; for a record sequence it
    is ``(list of PulseRecord-or-None, ledger)``.
    """
    if not isinstance(pulses, PulseBatch):
        batch = PulseBatch.from_records(pulses)
        out, forwarded, ledger = _eve_batch(batch, strategy, rng)
        return [out.record(i) if forwarded[i] else None for i in range(len(out))], ledger
    return _eve_batch(pulses, strategy, rng)


def _eve_batch(batch: PulseBatch, strategy: EveStrategy, rng: np.random.Generator):
    if strategy.kind is not EveKind.PNS_QND:
        raise DomainError("eve_process_stream needs a PNS_QND strategy")
    n = len(batch)
    u_block = rng.random(n)
    u_collapse = rng.random(n)
    counts = batch.photon_count
    n_single = int(np.count_nonzero(counts == 1))
    n_multi = int(np.count_nonzero(counts >= 2))
    pbs, pbm = blocking_probabilities(n_single, n_multi, strategy.replaced_loss)
    actions = _kernels.pns_actions(counts, u_block, pbs, pbm)

    out = batch.copy()
    split = actions == _kernels.SPLIT_FORWARD
    out.photon_count[split] -= 1
    # a number measurement localises an ancilla photon in one time bin
    sup = (out.timebin == TimeBin.SUPERPOSED) & (counts > 0)
    out.timebin[sup] = np.where(u_collapse[sup] < 0.5, TimeBin.EARLY, TimeBin.LATE)
    out.coherence[sup] = 0.0

    forwarded = actions != _kernels.BLOCKED
    n_split = int(np.count_nonzero(split))
    ledger = AttackLedger(
        pulses_seen=n,
        pulses_blocked=n - int(np.count_nonzero(forwarded)),
        pulses_split=n_split,
        photons_stored=n_split,
        known_bit_indices=np.flatnonzero(split),
    )
    return out, forwarded, ledger


def transmit(batch: PulseBatch, channel: ChannelConfig, eve: EveStrategy, channel_rng, eve_rng):
    """Send a batch to Bob's lab.

    Without Eve the line applies whole-pulse loss. With the PNS attack the
    whole line is replaced, so only Eve's blocking removes pulses. Dephasing
    acts in both cases on ancillas still in superposition.

    Returns ``(batch_at_bob, arrived_mask, ledger_or_None)``.
    """
    ledger = None
    if eve.present:
        out, arrived, ledger = _eve_batch(batch, eve, eve_rng)
    else:
        out, arrived = batch, survival_mask(len(batch), channel, channel_rng)
    return dephase_batch(out, channel), arrived, ledger


def received_class_shares(batch: PulseBatch, forwarded: np.ndarray) -> tuple[float, float]:
    """Class-1 and class-2 shares among forwarded nonvacuum decoy pulses."""
    seen = forwarded & (batch.photon_count > 0)
    total = int(np.count_nonzero(seen))
    if total == 0:
        raise DegenerateError("no nonvacuum pulses were forwarded")
    n1 = int(np.count_nonzero(seen & (batch.source_class == SourceClass.DECOY_1)))
    return n1 / total, (total - n1) / total


def eve_decoy_fractions(
    cfg: DecoyIntensityConfig, loss: float, n_pulses: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo class shares Bob receives when Eve attacks a decoy source."""
    if n_pulses < 1:
        raise DomainError("n_pulses must be positive")
    batch = emit_decoy_batch(cfg, n_pulses, rng)
    out, forwarded, _ = _eve_batch(batch, EveStrategy.pns(loss), rng)
    return received_class_shares(out, forwarded)

