"""Scenario files: flat ``key = value`` text grouped under module-named sections.

Example::

    # baseline run
    [experiment_cli]
    scenario_name = baseline
    n_slots = 200000
    seed = 7
    confidence = 0.99

    [sources]
    mu = 0.5                 # or mu1 / mu2 / fraction1 for a decoy source

    [ee_protocol]
    f_da = 0.1
    f_db = 0.1

    [channels_adversary]
    loss = 0.5
    dephasing = 0.1
    eve = pns_qnd            # or absent
    replaced_loss = 0.5      # defaults to loss

Unknown sections or keys are rejected, with the line number in the message.
"""
from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .channel import ChannelConfig, EveKind, EveStrategy
from .ee import ModeSchedule
from .errors import ConfigError, QkdlabError
from .rng import MAX_SEED
from .sources import DecoyIntensityConfig, WlpSourceConfig

SEED_ENV = "QKDLAB_SEED"

_SCHEMA = {
    "experiment_cli": {"scenario_name": str, "n_slots": int, "seed": int, "confidence": float},
    "sources": {"mu": float, "mu1": float, "mu2": float, "fraction1": float, "fraction2": float},
    "ee_protocol": {"f_sa": float, "f_da": float, "f_sb": float, "f_db": float},
    "channels_adversary": {"loss": float, "dephasing": float, "eve": str, "replaced_loss": float},
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_name: str = "default"
    source: WlpSourceConfig | DecoyIntensityConfig = field(default_factory=WlpSourceConfig)
    schedule: ModeSchedule = field(default_factory=lambda: ModeSchedule(0.1, 0.1))
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    eve: EveStrategy = field(default_factory=EveStrategy)
    confidence: float = 0.99
    n_slots: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_slots < 1:
            raise ConfigError("must be a positive integer", field="experiment_cli.n_slots")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError("must be a 64-bit unsigned integer", field="experiment_cli.seed")
        if not 0.5 < self.confidence < 1.0:
            raise ConfigError("must lie in (0.5, 1)", field="experiment_cli.confidence")

    @property
    def is_decoy(self) -> bool:
        return isinstance(self.source, DecoyIntensityConfig)


def _line_index(text: str) -> dict[tuple[str | None, str], int]:
    """Map (section, key) and (None, section) to 1-based line numbers."""
    index: dict[tuple[str | None, str], int] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            index.setdefault((None, section), lineno)
        elif "=" in line and section is not None:
            index.setdefault((section, line.split("=", 1)[0].strip().lower()), lineno)
    return index


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None
    )
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line, expected 'key = value'", line=lineno) from None
    except configparser.Error as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(exc.message, line=int(m.group(1)) if m else None) from None

    lines = _line_index(text)
    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", line=lines.get((None, section)))
        values[section] = {}
        for key, raw in parser.items(section):
            where = dict(line=lines.get((section, key)), field=f"{section}.{key}")
            kind = _SCHEMA[section].get(key)
            if kind is None:
                raise ConfigError("unknown key", **where)
            try:
                values[section][key] = int(raw, 0) if kind is int else kind(raw.strip())
            except ValueError:
                raise ConfigError(f"cannot read {raw!r} as {kind.__name__}", **where) from None

    def build(section: str, make):
        try:
            return make(values.get(section, {}))
        except ConfigError:
            raise
        except (QkdlabError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc), line=lines.get((None, section)), field=f"[{section}]") from None

    def make_source(v):
        if "mu" in v and any(k in v for k in ("mu1", "mu2", "fraction1", "fraction2")):
            raise ValueError("give either mu (weak laser source) or mu1/mu2/fraction1 (decoy source), not both")
        if any(k in v for k in ("mu1", "mu2", "fraction1", "fraction2")):
            return DecoyIntensityConfig(**v)
        return WlpSourceConfig(**v)

    def make_schedule(v):
        f_da = v.get("f_da", 1 - v["f_sa"] if "f_sa" in v else 0.1)
        f_db = v.get("f_db", 1 - v["f_sb"] if "f_sb" in v else 0.1)
        return ModeSchedule.from_frequencies(v.get("f_sa", 1 - f_da), f_da, v.get("f_sb", 1 - f_db), f_db)

    def make_channel(v):
        chan = ChannelConfig(v.get("loss", 0.0), v.get("dephasing", 0.0))
        kind = EveKind(str(v.get("eve", "absent")).lower())
        eve = EveStrategy(kind, v.get("replaced_loss", chan.loss if kind is EveKind.PNS_QND else 0.0))
        return chan, eve

    source = build("sources", make_source)
    schedule = build("ee_protocol", make_schedule)
    channel, eve = build("channels_adversary", make_channel)
    run = values.get("experiment_cli", {})
    try:
        return ScenarioConfig(
            scenario_name=str(run.get("scenario_name", "default")),
            source=source,
            schedule=schedule,
            channel=channel,
            eve=eve,
            confidence=float(run.get("confidence", 0.99)),
            n_slots=int(run.get("n_slots", 100_000)),
            seed=int(run.get("seed", 0)),
        )
    except ConfigError as exc:
        section, _, key = (exc.field or "").partition(".")
        raise ConfigError(exc.message, line=lines.get((section, key)), field=exc.field) from None


def load_config(path: str | os.PathLike) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def resolve_seed(flag: int | None, config_seed: int, env: dict | None = None) -> int:
    """Seed precedence: command-line flag, then ``QKDLAB_SEED``, then the file."""
    if flag is not None:
        return int(flag)
    env = os.environ if env is None else env
    raw = env.get(SEED_ENV, "").strip()
    if raw:
        try:
            seed = int(raw, 0)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None
        if not 0 <= seed <= MAX_SEED:
            raise ConfigError(f"{SEED_ENV} must be a 64-bit unsigned integer")
        return seed
    return int(config_seed)
