import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkdlab.errors import DomainError
from qkdlab.sources import (
    LAUNCH_PROBABILITY,
    DecoyIntensityConfig,
    Polarization,
    PulseBatch,
    PulseRecord,
    SourceClass,
    TimeBin,
    WlpSourceConfig,
    emit_ancilla_batch,
    emit_decoy_batch,
    emit_decoy_pulse,
    emit_heralded_ancilla,
    emit_wlp_batch,
    multi_photon_probability,
    poisson_pmf,
    sample_photon_number,
    sample_photon_numbers,
)

from oracles import binomial_sigma, poisson_pmf as pmf_oracle


def test_vacuum_source_is_always_empty():
    rng = np.random.default_rng(0)
    assert all(sample_photon_number(WlpSourceConfig(0.0), rng) == 0 for _ in range(1000))


def test_negative_mu_rejected():
    with pytest.raises(DomainError):
        WlpSourceConfig(-0.1)
    with pytest.raises(DomainError):
        multi_photon_probability(-1.0)


def test_single_photon_probability():
    assert poisson_pmf(1, 0.1) == pytest.approx(0.1 * math.exp(-0.1), rel=1e-14)
    assert poisson_pmf(1, 0.1) == pytest.approx(0.09048374180359596, rel=1e-14)


def test_empirical_pmf_matches_poisson():
    n = 1_000_000
    draws = sample_photon_numbers(WlpSourceConfig(0.2), np.random.default_rng(1), n)
    for k in range(4):
        expect = pmf_oracle(k, 0.2)
        got = np.mean(draws == k)
        assert abs(got - expect) <= 3 * binomial_sigma(expect, n), k


def test_poisson_mean():
    n = 1_000_000
    draws = sample_photon_numbers(WlpSourceConfig(0.7), np.random.default_rng(2), n)
    assert abs(draws.mean() - 0.7) <= 4 * math.sqrt(0.7 / n)


class TestMultiPhoton:
    def test_zero(self):
        assert multi_photon_probability(0.0) == 0.0

    def test_half(self):
        tail = sum(pmf_oracle(k, 0.5) for k in range(2, 51))
        assert multi_photon_probability(0.5) == pytest.approx(1 - 1.5 * math.exp(-0.5), abs=1e-15)
        assert multi_photon_probability(0.5) == pytest.approx(tail, abs=1e-14)
        assert round(multi_photon_probability(0.5), 5) == 0.09020

    @given(st.floats(min_value=0.0, max_value=5.0))
    def test_partition_of_unity(self, mu):
        total = multi_photon_probability(mu) + poisson_pmf(0, mu) + poisson_pmf(1, mu)
        assert abs(total - 1.0) <= 1e-12
        assert abs(multi_photon_probability(mu) - (1 - math.exp(-mu) - mu * math.exp(-mu))) <= 1e-12


class TestAncilla:
    def test_record(self):
        rng = np.random.default_rng(3)
        for t in range(50):
            p = emit_heralded_ancilla(rng, emission_time=t)
            assert p.photon_count == 1
            assert p.timebin is TimeBin.SUPERPOSED
            assert p.coherence == 1.0
            assert p.emission_time == t
            assert p.polarization in set(Polarization)

    def test_polarization_uniform(self):
        n = 100_000
        batch = emit_ancilla_batch(n, np.random.default_rng(4))
        for pol in Polarization:
            got = np.mean(batch.polarization == pol)
            assert abs(got - 0.25) <= 3 * binomial_sigma(0.25, n)

    def test_launch_probability_constant(self):
        assert LAUNCH_PROBABILITY == 0.5


class TestDecoySource:
    def test_fraction2_derived(self):
        cfg = DecoyIntensityConfig(0.1, 0.5, 0.7)
        assert cfg.fraction1 + cfg.fraction2 == 1.0
        with pytest.raises(DomainError):
            DecoyIntensityConfig(0.1, 0.5, 0.7, 0.4)

    def test_equal_intensities_flagged(self):
        with pytest.warns(UserWarning):
            DecoyIntensityConfig(0.3, 0.3, 0.5)

    def test_all_class_one(self):
        rng = np.random.default_rng(5)
        cfg = DecoyIntensityConfig(0.1, 0.5, 1.0)
        assert all(emit_decoy_pulse(cfg, rng).source_class is SourceClass.DECOY_1 for _ in range(500))
        assert np.all(emit_decoy_batch(cfg, 10_000, rng).source_class == SourceClass.DECOY_1)

    def test_record_fields(self):
        p = emit_decoy_pulse(DecoyIntensityConfig(0.1, 0.5, 0.7), np.random.default_rng(6))
        assert p.timebin is TimeBin.NONE
        assert p.polarization is not None
        assert p.mu in (0.1, 0.5)

    def test_class_shares_and_photon_statistics(self):
        n = 1_000_000
        cfg = DecoyIntensityConfig(0.1, 0.5, 0.7)
        batch = emit_decoy_batch(cfg, n, np.random.default_rng(7))
        is1 = batch.source_class == SourceClass.DECOY_1
        assert abs(is1.mean() - 0.7) <= 3 * binomial_sigma(0.7, n)
        for mask, mu in ((is1, 0.1), (~is1, 0.5)):
            m = int(mask.sum())
            for k in range(3):
                expect = pmf_oracle(k, mu)
                got = np.mean(batch.photon_count[mask] == k)
                assert abs(got - expect) <= 3 * binomial_sigma(expect, m), (mu, k)


class TestPulseRecordInvariants:
    def test_ancilla_never_multi(self):
        with pytest.raises(DomainError):
            PulseRecord(SourceClass.ANCILLA, 2, Polarization.H, TimeBin.SUPERPOSED, 1.0)

    def test_ancilla_needs_timebin(self):
        with pytest.raises(DomainError):
            PulseRecord(SourceClass.ANCILLA, 1, Polarization.H, TimeBin.NONE)

    def test_signal_has_no_timebin(self):
        with pytest.raises(DomainError):
            PulseRecord(SourceClass.SIGNAL, 1, Polarization.H, TimeBin.SUPERPOSED, 1.0)

    def test_batches_respect_invariants(self):
        rng = np.random.default_rng(8)
        wlp = emit_wlp_batch(WlpSourceConfig(2.0), 5000, rng)
        anc = emit_ancilla_batch(5000, rng)
        assert np.all(wlp.timebin == TimeBin.NONE)
        assert np.all(anc.photon_count <= 1) and np.all(anc.timebin != TimeBin.NONE)


def test_batch_record_round_trip():
    rng = np.random.default_rng(9)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        batch = PulseBatch.concatenate([
            emit_wlp_batch(WlpSourceConfig(0.5), 20, rng),
            emit_ancilla_batch(20, rng, start_time=20),
            emit_decoy_batch(DecoyIntensityConfig(), 20, rng, start_time=40),
        ])
    records = batch.to_records()
    again = PulseBatch.from_records(records)
    assert again.to_records() == records
    assert [r.emission_time for r in records] == list(range(60))
