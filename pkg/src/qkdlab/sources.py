"""Alice's photon sources.

Two kinds of pulse leave Alice's lab:

* weak laser pulses with Poissonian photon number (signal and decoy
  intensities), which carry BB84 polarisation only;
* heralded single photons from a down-conversion pair, sent through an
  unbalanced interferometer so they travel as an early/late time-bin
  superposition (the entangled ancilla).

Single pulses are :class:`PulseRecord` objects. Long streams use
:class:`PulseBatch`, which stores the same fields column-wise in numpy arrays.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

# Probability that the heralded photon leaves Alice's second beamsplitter
# into the channel (balanced splitters). Only used for pulses-sent accounting;
# the other port is detected and discarded before launch.
LAUNCH_PROBABILITY = 0.5


class Polarization(enum.IntEnum):
    H = 0
    V = 1
    D = 2
    A = 3

    @property
    def basis(self) -> int:
        """0 for rectilinear (H/V), 1 for diagonal (D/A)."""
        return int(self) >> 1

    @property
    def bit(self) -> int:
        return int(self) & 1


class SourceClass(enum.IntEnum):
    SIGNAL = 0
    DECOY_1 = 1
    DECOY_2 = 2
    ANCILLA = 3


class TimeBin(enum.IntEnum):
    NONE = 0
    SUPERPOSED = 1
    EARLY = 2
    LATE = 3

    @property
    def collapsed(self) -> bool:
        return self in (TimeBin.EARLY, TimeBin.LATE)


NO_POLARIZATION = -1


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not mu >= 0.0 or math.isinf(mu):
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu!r}")
    return mu


@dataclass(frozen=True)
class WlpSourceConfig:
    mu: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "mu", _check_mu(self.mu))


@dataclass(frozen=True)
class DecoyIntensityConfig:
    """Two-intensity coherent source; ``fraction2`` defaults to ``1 - fraction1``."""

    mu1: float = 0.1
    mu2: float = 0.5
    fraction1: float = 0.7
    fraction2: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu1", _check_mu(self.mu1))
        object.__setattr__(self, "mu2", _check_mu(self.mu2))
        f1 = float(self.fraction1)
        if not 0.0 <= f1 <= 1.0:
            raise DomainError(f"fraction1 must lie in [0, 1], got {f1!r}")
        if self.fraction2 is not None and not math.isclose(f1 + float(self.fraction2), 1.0, abs_tol=1e-12):
            raise DomainError(f"fraction1 + fraction2 must equal 1, got {f1} + {self.fraction2}")
        object.__setattr__(self, "fraction1", f1)
        object.__setattr__(self, "fraction2", 1.0 - f1)
        if self.mu1 == self.mu2:
            warnings.warn("mu1 == mu2: decoy intensities are identical, the attack is invisible", stacklevel=3)

    def mu_of(self, cls: int) -> float:
        return self.mu1 if cls == 1 else self.mu2


@dataclass(frozen=True)
class PulseRecord:
    """One optical pulse as Alice prepared it (or as it left the channel)."""

    source_class: SourceClass
    photon_count: int
    polarization: Polarization | None = None
    timebin: TimeBin = TimeBin.NONE
    coherence: float = 0.0
    emission_time: int = 0
    mu: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "source_class", SourceClass(self.source_class))
        object.__setattr__(self, "timebin", TimeBin(self.timebin))
        if self.polarization is not None:
            object.__setattr__(self, "polarization", Polarization(self.polarization))
        if self.photon_count < 0:
            raise DomainError("photon_count must be nonnegative")
        if not 0.0 <= self.coherence <= 1.0:
            raise DomainError(f"coherence must lie in [0, 1], got {self.coherence}")
        if self.source_class is SourceClass.ANCILLA:
            if self.photon_count > 1 or self.timebin is TimeBin.NONE:
                raise DomainError("ancilla pulses carry at most one photon and a time-bin state")
        elif self.timebin is not TimeBin.NONE:
            raise DomainError("signal/decoy pulses carry no time-bin state")

    @property
    def is_ancilla(self) -> bool:
        return self.source_class is SourceClass.ANCILLA


@dataclass
class PulseBatch:
    """Column-wise pulse stream; row ``i`` is one :class:`PulseRecord`."""

    source_class: np.ndarray
    photon_count: np.ndarray
    polarization: np.ndarray
    timebin: np.ndarray
    coherence: np.ndarray
    emission_time: np.ndarray
    mu: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.source_class)
        self.source_class = np.asarray(self.source_class, dtype=np.int8)
        self.photon_count = np.asarray(self.photon_count, dtype=np.int64)
        self.polarization = np.asarray(self.polarization, dtype=np.int8)
        self.timebin = np.asarray(self.timebin, dtype=np.int8)
        self.coherence = np.asarray(self.coherence, dtype=np.float64)
        self.emission_time = np.asarray(self.emission_time, dtype=np.int64)
        self.mu = np.full(n, np.nan) if self.mu is None else np.asarray(self.mu, dtype=np.float64)
        for name in ("photon_count", "polarization", "timebin", "coherence", "emission_time", "mu"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has length {len(getattr(self, name))}, expected {n}")

    def __len__(self) -> int:
        return len(self.source_class)

    @classmethod
    def empty(cls) -> "PulseBatch":
        z = np.zeros(0)
        return cls(z, z, z, z, z, z, z)

    @classmethod
    def from_records(cls, records: Iterable[PulseRecord]) -> "PulseBatch":
        records = list(records)
        return cls(
            source_class=[int(r.source_class) for r in records],
            photon_count=[r.photon_count for r in records],
            polarization=[NO_POLARIZATION if r.polarization is None else int(r.polarization) for r in records],
            timebin=[int(r.timebin) for r in records],
            coherence=[r.coherence for r in records],
            emission_time=[r.emission_time for r in records],
            mu=[np.nan if r.mu is None else r.mu for r in records],
        )

    def record(self, i: int) -> PulseRecord:
        pol = int(self.polarization[i])
        mu = float(self.mu[i])
        return PulseRecord(
            source_class=SourceClass(int(self.source_class[i])),
            photon_count=int(self.photon_count[i]),
            polarization=None if pol == NO_POLARIZATION else Polarization(pol),
            timebin=TimeBin(int(self.timebin[i])),
            coherence=float(self.coherence[i]),
            emission_time=int(self.emission_time[i]),
            mu=None if math.isnan(mu) else mu,
        )

    def to_records(self) -> list[PulseRecord]:
        return [self.record(i) for i in range(len(self))]

    def copy(self) -> "PulseBatch":
        return PulseBatch(*(getattr(self, f).copy() for f in _COLUMNS))

    def take(self, index) -> "PulseBatch":
        return PulseBatch(*(getattr(self, f)[index] for f in _COLUMNS))

    @staticmethod
    def concatenate(batches: Sequence["PulseBatch"]) -> "PulseBatch":
        if not batches:
            return PulseBatch.empty()
        return PulseBatch(*(np.concatenate([getattr(b, f) for b in batches]) for f in _COLUMNS))

    @property
    def is_ancilla(self) -> np.ndarray:
        return self.source_class == SourceClass.ANCILLA


_COLUMNS = ("source_class", "photon_count", "polarization", "timebin", "coherence", "emission_time", "mu")


def poisson_pmf(n: int, mu: float) -> float:
    """Probability that a coherent pulse of mean ``mu`` holds ``n`` photons."""
    mu = _check_mu(mu)
    if n < 0:
        return 0.0
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1))


def multi_photon_probability(mu: float) -> float:
    """Probability of two or more photons: ``1 - e^-mu - mu e^-mu``."""
    mu = _check_mu(mu)
    return max(0.0, -math.expm1(-mu) - mu * math.exp(-mu))


def sample_photon_number(cfg: WlpSourceConfig, rng: np.random.Generator) -> int:
    return int(rng.poisson(cfg.mu))


def sample_photon_numbers(cfg: WlpSourceConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.poisson(cfg.mu, size=size).astype(np.int64)


def emit_wlp_batch(cfg: WlpSourceConfig, n: int, rng: np.random.Generator, start_time: int = 0) -> PulseBatch:
    """``n`` signal pulses with random BB84 polarisation."""
    counts = sample_photon_numbers(cfg, rng, n)
    pol = rng.integers(0, 4, size=n, dtype=np.int8)
    return PulseBatch(
        source_class=np.full(n, SourceClass.SIGNAL, dtype=np.int8),
        photon_count=counts,
        polarization=pol,
        timebin=np.zeros(n, dtype=np.int8),
        coherence=np.zeros(n),
        emission_time=np.arange(start_time, start_time + n),
        mu=np.full(n, cfg.mu),
    )


def emit_heralded_ancilla(rng: np.random.Generator, emission_time: int = 0) -> PulseRecord:
    """A heralded single photon in an ideal early/late superposition.

    Photons that exit the wrong port of Alice's second beamsplitter are
    already discarded; see :data:`LAUNCH_PROBABILITY`.
    """
    return PulseRecord(
        source_class=SourceClass.ANCILLA,
        photon_count=1,
        polarization=Polarization(int(rng.integers(0, 4))),
        timebin=TimeBin.SUPERPOSED,
        coherence=1.0,
        emission_time=emission_time,
    )


def emit_ancilla_batch(n: int, rng: np.random.Generator, start_time: int = 0) -> PulseBatch:
    return PulseBatch(
        source_class=np.full(n, SourceClass.ANCILLA, dtype=np.int8),
        photon_count=np.ones(n, dtype=np.int64),
        polarization=rng.integers(0, 4, size=n, dtype=np.int8),
        timebin=np.full(n, TimeBin.SUPERPOSED, dtype=np.int8),
        coherence=np.ones(n),
        emission_time=np.arange(start_time, start_time + n),
    )


def emit_decoy_pulse(cfg: DecoyIntensityConfig, rng: np.random.Generator, emission_time: int = 0) -> PulseRecord:
    cls = 1 if rng.random() < cfg.fraction1 else 2
    mu = cfg.mu_of(cls)
    return PulseRecord(
        source_class=SourceClass(cls),
        photon_count=int(rng.poisson(mu)),
        polarization=Polarization(int(rng.integers(0, 4))),
        emission_time=emission_time,
        mu=mu,
    )


def emit_decoy_batch(cfg: DecoyIntensityConfig, n: int, rng: np.random.Generator, start_time: int = 0) -> PulseBatch:
    is1 = rng.random(n) < cfg.fraction1
    mu = np.where(is1, cfg.mu1, cfg.mu2)
    return PulseBatch(
        source_class=np.where(is1, SourceClass.DECOY_1, SourceClass.DECOY_2).astype(np.int8),
        photon_count=rng.poisson(mu).astype(np.int64),
        polarization=rng.integers(0, 4, size=n, dtype=np.int8),
        timebin=np.zeros(n, dtype=np.int8),
        coherence=np.zeros(n),
        emission_time=np.arange(start_time, start_time + n),
        mu=mu,
    )
