"""``qkdlab`` command line.

Exit status: 0 success, 2 configuration error, 3 domain error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import load_config, resolve_seed
from .decoy import DecoyScenario, comparison_curve, crossover_loss, run_decoy_detection
from .ee import detect_eavesdropper, run_bb84_exchange, trials_vs_dephasing_curve
from .errors import ConfigError, PerfectlyDistinguishableError, QkdlabError
from .rng import Streams
from .sources import DecoyIntensityConfig
from .stats import BernoulliHypothesisPair, plan_detection

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

EE_LEVELS = (0.10, 0.30)


def fmt(value) -> str:
    """Integers verbatim, reals to 6 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    if str(path) == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise argparse.ArgumentTypeError("steps must be positive")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def cmd_chernoff(args) -> int:
    h = BernoulliHypothesisPair(args.p, args.q)
    try:
        plan = plan_detection(h, args.max_error)
    except PerfectlyDistinguishableError as exc:
        print(f"perfectly distinguishable hypotheses: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if not plan.reachable:
        print(f"indistinguishable hypotheses: p={h.p} q={h.q} give Chernoff distance 0", file=sys.stderr)
        return EXIT_DOMAIN
    for key, value in (
        ("p", h.p),
        ("q", h.q),
        ("chernoff_distance", plan.chernoff_distance),
        ("xi", plan.xi),
        ("max_error", plan.max_error),
        ("trials_needed", plan.trials_needed),
        ("error_bound", plan.error_bound),
    ):
        print(f"{key} = {fmt(value)}")
    return EXIT_OK


def cmd_ee_curve(args) -> int:
    if not 0.0 <= args.d_min < args.d_max < 0.5:
        print("need 0 <= d-min < d-max < 0.5", file=sys.stderr)
        return EXIT_DOMAIN
    rows = trials_vs_dephasing_curve(_grid(args.d_min, args.d_max, args.steps), args.confidence)
    write_csv(args.out, ("dephasing", "trials_needed"), rows)
    return EXIT_OK


def _decoy_template(args) -> DecoyScenario:
    if args.config:
        cfg = load_config(args.config)
        if not cfg.is_decoy:
            raise ConfigError("the [sources] section must describe a decoy source (mu1, mu2, fraction1)")
        return DecoyScenario(cfg.source, 0.5, cfg.confidence)
    return DecoyScenario(DecoyIntensityConfig(args.mu1, args.mu2, args.fraction1), 0.5, args.confidence)


def _decoy_rows(args):
    template = _decoy_template(args)
    points = comparison_curve(_grid(args.loss_min, args.loss_max, args.steps), EE_LEVELS, template)
    d10, d30 = EE_LEVELS
    rows = [
        (pt.loss, pt.pulses_sent_decoy, pt.pulses_sent_ee[d10], pt.pulses_sent_ee[d30], pt.ratio[d10])
        for pt in points
    ]
    return points, rows


DECOY_HEADER = ("loss", "pulses_decoy", "pulses_ee_d10", "pulses_ee_d30", "ratio_d10")


def cmd_decoy_curve(args) -> int:
    _, rows = _decoy_rows(args)
    write_csv(args.out, DECOY_HEADER, rows)
    return EXIT_OK


def cmd_compare(args) -> int:
    points, rows = _decoy_rows(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "decoy_curve.csv", DECOY_HEADER, rows)
    ee_rows = trials_vs_dephasing_curve(_grid(0.0, 0.45, 10), args.confidence)
    write_csv(out / "ee_curve.csv", ("dephasing", "trials_needed"), ee_rows)

    print(f"{'loss':>6} {'decoy':>10} {'ee_d10':>8} {'ee_d30':>8} {'ratio_d10':>10} {'ratio_d30':>10}")
    for pt in points:
        d10, d30 = EE_LEVELS
        print(
            f"{pt.loss:6.3g} {pt.pulses_sent_decoy:10d} {pt.pulses_sent_ee[d10]:8d} "
            f"{pt.pulses_sent_ee[d30]:8d} {pt.ratio[d10]:10.4g} {pt.ratio[d30]:10.4g}"
        )
    for d in EE_LEVELS:
        cross = crossover_loss(points, d)
        where = "none on this grid" if cross is None else f"loss >= {cross:.6g}"
        print(f"decoy states cheaper than EE (d={d:g}): {where}")
    return EXIT_OK


def _summary_rows(cfg, seed):
    streams = Streams.from_seed(seed)
    rows = [("scenario_name", cfg.scenario_name), ("seed", seed), ("n_slots", cfg.n_slots)]
    if cfg.is_decoy:
        rep = run_decoy_detection(cfg.source, cfg.n_slots, cfg.channel, cfg.eve, cfg.confidence, streams)
        rows += [
            ("received_pulses", rep.received_pulses),
            ("class1_share", rep.class1_share),
            ("null_class1_share", rep.null_share),
            ("attack_class1_share", rep.attack_share),
            ("trials_needed", rep.trials_needed),
            ("trials_used", rep.trials_used),
            ("decision", rep.decision.value),
        ]
        return rows, None
    result = run_bb84_exchange(cfg.n_slots, cfg.source, cfg.schedule, cfg.channel, cfg.eve, streams)
    report = detect_eavesdropper(result.decoy_events, cfg.channel, cfg.confidence)
    st = result.stats
    rows += [
        ("key_slots", st.key_slots),
        ("decoy_slots", st.decoy_slots),
        ("wasted_slots", st.wasted_slots),
        ("received_pulses", st.received_pulses),
        ("sifted_length", st.sifted_length),
        ("qber", st.qber),
        ("eve_known_fraction", st.eve_known_fraction),
        ("middle_bright", st.middle_bright),
        ("middle_dark", st.middle_dark),
        ("ss", st.ss),
        ("ll", st.ll),
        ("trials_needed", report.trials_needed),
        ("trials_used", report.trials_used),
        ("decision", report.decision.value),
    ]
    return rows, result


def _slot_rows(result):
    for i in range(len(result.alice_decoy)):
        o = result.slot_outcome(i)
        yield (
            i,
            "decoy" if result.alice_decoy[i] else "signal",
            "decoy" if result.bob_decoy[i] else "signal",
            o.category.value,
            "" if o.detail is None else o.detail.name.lower(),
            "" if o.bit is None else o.bit,
        )


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    seed = resolve_seed(args.seed, cfg.seed)
    rows, result = _summary_rows(cfg, seed)
    write_csv(args.out, ("metric", "value"), rows)
    if args.slot_log:
        if result is None:
            raise ConfigError("--slot-log needs a weak laser [sources] section (mu)")
        write_csv(args.slot_log, ("slot", "alice_mode", "bob_mode", "category", "detail", "bit"), _slot_rows(result))
    if args.out != "-":
        for key, value in rows:
            print(f"{key} = {fmt(value)}")
    return EXIT_OK


def _add_decoy_options(p):
    p.add_argument("--loss-min", type=float, default=0.05)
    p.add_argument("--loss-max", type=float, default=0.95)
    p.add_argument("--steps", type=int, default=19)
    p.add_argument("--mu1", type=float, default=0.1)
    p.add_argument("--mu2", type=float, default=0.5)
    p.add_argument("--fraction1", type=float, default=0.7)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--config", help="scenario file whose [sources] section sets mu1/mu2/fraction1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkdlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chernoff", help="Chernoff distance and trials needed for a Bernoulli pair")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--max-error", type=float, default=0.01)
    p.set_defaults(func=cmd_chernoff)

    p = sub.add_parser("ee-curve", help="trials needed versus dephasing (CSV)")
    p.add_argument("--d-min", type=float, default=0.0)
    p.add_argument("--d-max", type=float, default=0.45)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_ee_curve)

    p = sub.add_parser("decoy-curve", help="decoy and EE pulses needed versus loss (CSV)")
    _add_decoy_options(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_decoy_curve)

    p = sub.add_parser("compare", help="decoy curve, EE curve and ratio table")
    _add_decoy_options(p)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="end-to-end seeded protocol run")
    p.add_argument("config")
    p.add_argument("--out", default="-")
    p.add_argument("--slot-log")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QkdlabError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
