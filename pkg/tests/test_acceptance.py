"""End-to-end acceptance checks, one test per criterion.

The terminal summary prints a PASS/FAIL line for each (see conftest.py).
"""
import csv
import math
from fractions import Fraction

import numpy as np
import pytest

from qkdlab.channel import ChannelConfig, EveStrategy, eve_decoy_fractions
from qkdlab.cli import main
from qkdlab.decoy import attack_fraction_oracle, nonvacuum_probability, null_fraction
from qkdlab.ee import Decision, ModeSchedule, SlotCategory, detect_eavesdropper, run_bb84_exchange, trials_vs_dephasing_curve
from qkdlab.rng import Streams
from qkdlab.sources import DecoyIntensityConfig, WlpSourceConfig
from qkdlab.stats import BernoulliHypothesisPair as H
from qkdlab.stats import chernoff_distance, empirical_test_error, max_error_probability, trials_needed

from oracles import binomial_sigma, chernoff_by_minimization, trials_by_oracle

criterion = pytest.mark.criterion


@criterion("1", "six photons suffice at d=0, 99% confidence; C(1, 1/2) = ln 2")
def test_headline_number():
    assert trials_needed(H(1.0, 0.5), 0.01) == 6
    assert abs(chernoff_distance(H(1.0, 0.5)) - math.log(2)) <= 1e-9


@criterion("2", "empirical ML-test error below the Chernoff bound + 3 SE")
def test_bound_validity():
    reps = 100_000
    for i, (p, q) in enumerate([(0.9, 0.5), (0.8, 0.6)]):
        for n in (10, 50):
            h = H(p, q)
            rate = empirical_test_error(h, n, reps, np.random.default_rng(7000 + 100 * i + n))
            bound = max_error_probability(n, h)
            assert rate <= bound + 3 * math.sqrt(bound * (1 - bound) / reps), (p, q, n, rate, bound)


@criterion("3", "closed-form Chernoff distance equals the minimisation oracle on 1000 pairs")
def test_oracle_equivalence():
    rng = np.random.default_rng(2024)
    pairs = rng.random((1000, 2))
    worst = max(abs(chernoff_distance(H(p, q)) - chernoff_by_minimization(p, q)) for p, q in pairs)
    assert worst <= 1e-9, worst


@criterion("4", "trials-vs-dephasing curve: n(0)=6, monotone, n(0.45) > 100 n(0), spot values")
def test_dephasing_curve():
    rows = dict(trials_vs_dephasing_curve(np.round(np.linspace(0, 0.45, 46), 10), 0.99))
    ns = list(rows.values())
    assert rows[0.0] == 6
    assert all(a <= b for a, b in zip(ns, ns[1:]))
    assert rows[0.45] > 100 * rows[0.0]
    for d in (0.1, 0.25):
        assert rows[d] == trials_by_oracle(1 - d, 0.5, 0.01)


@criterion("5", "slot-category frequencies match the mode-frequency products")
def test_mode_schedule_identity():
    n = 1_000_000
    sched = ModeSchedule(Fraction(3, 10), Fraction(1, 5))
    freqs = sched.category_frequencies()
    assert sum(freqs.values()) == 1
    assert freqs[SlotCategory.KEY_EXCHANGE] == sched.f_sa * sched.f_sb + sched.f_da * sched.f_sb
    assert freqs[SlotCategory.DECOY_DETECTION] == sched.f_da * sched.f_db
    assert freqs[SlotCategory.WASTED] == sched.f_sa * sched.f_db
    st = run_bb84_exchange(n, WlpSourceConfig(0.5), sched, ChannelConfig(0.3), EveStrategy(), 5).stats
    observed = {
        SlotCategory.KEY_EXCHANGE: st.key_slots,
        SlotCategory.DECOY_DETECTION: st.decoy_slots,
        SlotCategory.WASTED: st.wasted_slots,
    }
    for cat, f in freqs.items():
        assert abs(observed[cat] / n - float(f)) <= 3 * binomial_sigma(float(f), n), cat


@criterion("6", "PNS adversary invisible to counts and QBER in signal mode, yet learns key bits")
def test_eve_invisibility():
    n, mu, loss = 1_000_000, 0.5, 0.5
    args = (n, WlpSourceConfig(mu), ModeSchedule(0, 0), ChannelConfig(loss))
    base = run_bb84_exchange(*args, EveStrategy(), 61).stats
    eve = run_bb84_exchange(*args, EveStrategy.pns(loss), 62).stats

    p_recv = (1 - loss) * (1 - math.exp(-mu))
    sigma = math.sqrt(2 * n * p_recv * (1 - p_recv))
    assert abs(eve.received_pulses - base.received_pulses) <= 3 * sigma

    # QBER and the per-basis outcome distribution Bob sees
    for st in (base, eve):
        assert st.qber == 0.0
    fb = base.bob_outcome_counts / base.sifted_length
    fe = eve.bob_outcome_counts / eve.sifted_length
    for idx in np.ndindex(2, 2):
        s = math.sqrt(fb[idx] * (1 - fb[idx]) * (1 / base.sifted_length + 1 / eve.sifted_length))
        assert abs(fb[idx] - fe[idx]) <= 3 * s, idx
    assert abs(eve.sifted_length - base.sifted_length) <= 3 * math.sqrt(2 * base.sifted_length)

    assert base.eve_known_fraction == 0.0
    assert eve.eve_known_fraction > 0.0


@criterion("7", "higher-intensity class gains share under attack; closed form matches Monte Carlo")
def test_decoy_attack_direction():
    n = 1_000_000
    cfg = DecoyIntensityConfig(0.1, 0.5, 0.7)
    sent2 = 1 - null_fraction(cfg)
    for i, loss in enumerate((0.25, 0.5, 0.75)):
        f1, f2 = eve_decoy_fractions(cfg, loss, n, np.random.default_rng(70 + i))
        assert f2 > sent2, loss
        expect = attack_fraction_oracle(cfg, loss)
        m = int((1 - loss) * n * nonvacuum_probability(cfg))
        assert abs(f1 - expect) <= 3 * binomial_sigma(expect, m), loss


@pytest.fixture(scope="module")
def compare_rows(tmp_path_factory):
    out = tmp_path_factory.mktemp("compare")
    assert main(["compare", "--out-dir", str(out)]) == 0
    with open(out / "decoy_curve.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        (float(r["loss"]), int(r["pulses_decoy"]), int(r["pulses_ee_d10"]), float(r["ratio_d10"]))
        for r in rows
    ]


@criterion("8a", "EE (d=0.1) needs fewer pulses than decoy states for all loss < 0.75")
def test_fig4_ee_cheaper_at_low_loss(compare_rows):
    low = [r for r in compare_rows if r[0] < 0.75]
    assert low
    assert all(ee < decoy for _, decoy, ee, _ in low)


@criterion("8b", "decoy states win over EE (d=0.1) at very high loss")
def test_fig4_crossover(compare_rows):
    assert any(decoy < ee for loss, decoy, ee, _ in compare_rows if loss > 0.75)


@criterion("8c", "EE/decoy pulse ratio at loss 0.5, d=0.1 lies in [0.17, 0.5]")
def test_fig4_ratio_at_half_loss(compare_rows):
    (ratio,) = [r for loss, _, _, r in compare_rows if abs(loss - 0.5) < 1e-9]
    assert 0.17 <= ratio <= 0.5, ratio


@criterion("9", "PNS adversary at d=0 detected with 6 middle-bin events in >= 99% of 1000 seeded episodes")
def test_end_to_end_detection():
    channel = ChannelConfig(0.0, 0.0)
    detected = 0
    for seed in range(1000):
        res = run_bb84_exchange(400, WlpSourceConfig(0.5), ModeSchedule(0.5, 0.5), channel, EveStrategy.pns(0.0), Streams.from_seed(seed))
        rep = detect_eavesdropper(res.decoy_events, channel, 0.99)
        assert rep.trials_used == 6
        detected += rep.decision is Decision.EAVESDROPPER_DETECTED
    assert detected / 1000 >= 0.99, detected


@criterion("10", "same config and seed give byte-identical CSV output")
def test_determinism(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[experiment_cli]\nn_slots = 50000\nseed = 1234\n"
        "[sources]\nmu = 0.5\n"
        "[ee_protocol]\nf_da = 0.2\nf_db = 0.2\n"
        "[channels_adversary]\nloss = 0.5\ndephasing = 0.1\neve = pns_qnd\n"
    )
    blobs = []
    for i in range(2):
        s, log = tmp_path / f"s{i}.csv", tmp_path / f"l{i}.csv"
        assert main(["simulate", str(cfg), "--out", str(s), "--slot-log", str(log), "--seed", "1234"]) == 0
        blobs.append(s.read_bytes() + log.read_bytes())
    assert blobs[0] == blobs[1]
