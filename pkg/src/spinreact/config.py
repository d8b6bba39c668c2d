"""Run configuration: an INI-style ``key = value`` file with sections.

Example::

    [scheme]
    kind = two_site
    kS1 = 0
    kS2 = 1e4
    k12 = 1
    k21 = 1e2

    [state]
    c_S = 0.7071067811865476,0
    c_T = 0.7071067811865476,0

    [time]
    start = 0
    stop = 5
    points = 101

Complex numbers are written ``re,im``.  Any key can be overridden from the
command line with ``--set section.key=value``.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .liouville import PureSpinState
from .operators import ChannelRates, haberkorn_superop, measurement_superop
from .schemes import (
    KineticScheme,
    SiteSpec,
    build_common_intermediate,
    build_generic,
    build_three_site,
    build_two_site,
)

KINDS = ("single", "two_site", "common_intermediate", "three_site", "generic")
SCHEME_KEYS = {
    "single": ("kS", "kT"),
    "two_site": ("kS1", "kS2", "k12", "k21"),
    "common_intermediate": ("k12", "k21", "kS2", "kT2"),
    "three_site": ("k12", "k21", "k13", "k31", "kS2", "kT3"),
    "generic": (),
}


class ConfigError(ValueError):
    pass


def _line_numbers(text: str) -> dict[tuple[str, str], int]:
    lines, section = {}, None
    for n, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[(.+)\]$", stripped)
        if m:
            section = m.group(1).strip().lower()
        elif section and re.match(r"[^#;=\s][^=]*=", stripped):
            lines[(section, stripped.split("=", 1)[0].strip().lower())] = n
    return lines


class _Reader:
    """Typed access to parser values with line/field aware error messages."""

    def __init__(self, parser: configparser.ConfigParser, lines: dict, source: str):
        self.parser, self.lines, self.source = parser, lines, source

    def where(self, section, key):
        n = self.lines.get((section, key.lower()))
        loc = f"{self.source}:{n}" if n else self.source
        return f"{loc}: [{section}] {key}"

    def raw(self, section, key, default=None):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return default

    def float(self, section, key, default=None, minimum=None):
        raw = self.raw(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"{self.where(section, key)}: required value missing")
            return float(default)
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: not a number: {raw!r}") from None
        if not np.isfinite(value):
            raise ConfigError(f"{self.where(section, key)}: must be finite")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.where(section, key)}: must be >= {minimum}, got {value}")
        return value

    def int(self, section, key, default):
        raw = self.raw(section, key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: not an integer: {raw!r}") from None

    def floats(self, section, key, default=None, sep=","):
        raw = self.raw(section, key)
        if raw is None:
            return default
        try:
            return [float(x) for x in raw.split(sep) if x.strip()]
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: expected a {sep!r}-separated list of numbers") from None

    def complex(self, section, key, default):
        raw = self.raw(section, key)
        if raw is None:
            return default
        parts = raw.split(",")
        try:
            if len(parts) == 1:
                return complex(float(parts[0]), 0.0)
            if len(parts) == 2:
                return complex(float(parts[0]), float(parts[1]))
        except ValueError:
            pass
        raise ConfigError(f"{self.where(section, key)}: expected 're,im', got {raw!r}")


@dataclass
class RunConfig:
    kind: str = "single"
    operator: str = "haberkorn"
    rates: dict[str, float] = field(default_factory=lambda: {"kS": 1.0, "kT": 0.0})
    generic: KineticScheme | None = None
    c_S: complex = 1.0
    c_T: complex = 0.0
    distribution: tuple[float, ...] | None = None
    hamiltonian: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), dtype=complex))
    t_start: float = 0.0
    t_stop: float = 10.0
    points: int = 101
    spacing: str = "linear"
    output: str | None = None
    scan_ratios: list[float] = field(default_factory=lambda: list(np.geomspace(1e-3, 1e3, 25)))
    scan_k12: float = 1.0
    scan_k21: float = 100.0
    factor: float = 100.0
    tol: float = 0.05

    @property
    def n_sites(self) -> int:
        return {"single": 1, "two_site": 2, "common_intermediate": 2, "three_site": 3}.get(
            self.kind, self.generic.n_sites if self.generic else 1
        )

    @property
    def spin_state(self) -> PureSpinState:
        return PureSpinState(self.c_S, self.c_T)

    def scheme(self) -> KineticScheme:
        r = self.rates
        if self.kind == "single":
            return KineticScheme.single(r["kS"], r["kT"])
        if self.kind == "two_site":
            return KineticScheme.two_site(r["kS1"], r["kS2"], r["k12"], r["k21"], self.distribution)
        if self.kind == "common_intermediate":
            return KineticScheme.common_intermediate(r["k12"], r["k21"], r["kS2"], r["kT2"], self.distribution)
        if self.kind == "three_site":
            return KineticScheme.three_site(r["k12"], r["k21"], r["k13"], r["k31"], r["kS2"], r["kT3"],
                                            self.distribution)
        return self.generic

    def kinetic_operators(self) -> dict[str, np.ndarray]:
        """Named kinetic superoperators this configuration describes."""
        r = self.rates
        if self.kind == "single":
            ops = {"haberkorn": haberkorn_superop(r["kS"], r["kT"]).real,
                   "measurement": measurement_superop(r["kS"], r["kT"]).real}
            return ops if self.operator == "both" else {self.operator: ops[self.operator]}
        if self.kind == "two_site":
            return {"two_site": build_two_site(r["kS1"], r["kS2"], r["k12"], r["k21"])}
        if self.kind == "common_intermediate":
            return {"common_intermediate": build_common_intermediate(r["k12"], r["k21"], r["kS2"], r["kT2"])}
        if self.kind == "three_site":
            return {"three_site": build_three_site(r["k12"], r["k21"], r["k13"], r["k31"], r["kS2"], r["kT3"])}
        return {"generic": build_generic(self.generic)}

    def times(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.t_start, self.t_stop, self.points)
        return np.linspace(self.t_start, self.t_stop, self.points)


def _parse_generic(rd: _Reader) -> KineticScheme:
    kS = rd.floats("scheme", "kS")
    kT = rd.floats("scheme", "kT")
    if kS is None:
        raise ConfigError(f"{rd.where('scheme', 'kS')}: generic schemes need a per-site kS list")
    n = len(kS)
    kT = kT if kT is not None else [0.0] * n
    rows = rd.raw("scheme", "exchange", "")
    try:
        if rows:
            ex = [[float(x) for x in row.split(",")] for row in rows.split(";") if row.strip()]
        else:
            ex = [[0.0] * n for _ in range(n)]
    except ValueError:
        raise ConfigError(f"{rd.where('scheme', 'exchange')}: rows of comma-separated rates separated by ';'") from None
    if len(kT) != n or len(ex) != n or any(len(row) != n for row in ex):
        raise ConfigError(f"{rd.where('scheme', 'exchange')}: kS, kT and exchange must all describe {n} sites")
    dist = rd.floats("state", "distribution")
    try:
        sites = tuple(SiteSpec(f"R{i + 1}", ChannelRates(s, t)) for i, (s, t) in enumerate(zip(kS, kT)))
        return KineticScheme(sites, ex, dist)
    except ValueError as exc:
        raise ConfigError(f"{rd.where('scheme', 'kind')}: {exc}") from None


def load_config(path: str | Path | None = None, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse a config file (optional) plus ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    source, text = "<defaults>", ""
    if path is not None:
        source = str(path)
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{source}: cannot read config: {exc.strerror}") from None
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(str(exc).replace("\n", " ")) from None
    # case-insensitive sections
    for sec in list(parser.sections()):
        if sec != sec.lower():
            parser[sec.lower()] = dict(parser[sec])
            parser.remove_section(sec)
    for item in overrides:
        m = re.match(r"\s*([A-Za-z_]+)\.([A-Za-z_0-9]+)\s*=(.*)$", item)
        if not m:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        sec, key, value = m.group(1).lower(), m.group(2), m.group(3).strip()
        if not parser.has_section(sec):
            parser.add_section(sec)
        parser.set(sec, key, value)
    rd = _Reader(parser, _line_numbers(text), source)

    cfg = RunConfig()
    kind = (rd.raw("scheme", "kind", "single") or "single").lower()
    if kind not in KINDS:
        raise ConfigError(f"{rd.where('scheme', 'kind')}: unknown scheme kind {kind!r}; choose from {', '.join(KINDS)}")
    cfg.kind = kind
    cfg.operator = (rd.raw("scheme", "operator", "haberkorn") or "").lower()
    if kind == "single" and cfg.operator not in ("haberkorn", "measurement", "both"):
        raise ConfigError(f"{rd.where('scheme', 'operator')}: must be haberkorn, measurement or both")
    if kind == "generic":
        cfg.generic = _parse_generic(rd)
        cfg.rates = {}
    else:
        defaults = {"kS": 1.0} if kind == "single" else {}
        cfg.rates = {k: rd.float("scheme", k, defaults.get(k, 0.0), minimum=0.0) for k in SCHEME_KEYS[kind]}

    cfg.c_S = rd.complex("state", "c_S", 1.0 + 0j)
    cfg.c_T = rd.complex("state", "c_T", 0.0 + 0j)
    norm = abs(cfg.c_S) ** 2 + abs(cfg.c_T) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise ConfigError(f"{rd.where('state', 'c_S')}: |c_S|^2 + |c_T|^2 = {norm:.12g}, must be 1")
    if kind != "generic":
        dist = rd.floats("state", "distribution")
        if dist is not None:
            if len(dist) != cfg.n_sites or any(p < 0 for p in dist) or abs(sum(dist) - 1.0) > 1e-12:
                raise ConfigError(
                    f"{rd.where('state', 'distribution')}: need {cfg.n_sites} non-negative entries summing to 1"
                )
            cfg.distribution = tuple(dist)

    ss = rd.float("hamiltonian", "ss", 0.0)
    tt = rd.float("hamiltonian", "tt", 0.0)
    st = rd.complex("hamiltonian", "st", 0j)
    cfg.hamiltonian = np.array([[ss, st], [np.conj(st), tt]], dtype=complex)

    cfg.t_start = rd.float("time", "start", 0.0, minimum=0.0)
    cfg.t_stop = rd.float("time", "stop", 10.0)
    cfg.points = rd.int("time", "points", 101)
    cfg.spacing = (rd.raw("time", "spacing", "linear") or "").lower()
    if cfg.points < 2:
        raise ConfigError(f"{rd.where('time', 'points')}: need at least 2 points")
    if cfg.t_stop <= cfg.t_start:
        raise ConfigError(f"{rd.where('time', 'stop')}: must exceed start")
    if cfg.spacing not in ("linear", "log"):
        raise ConfigError(f"{rd.where('time', 'spacing')}: must be linear or log")
    if cfg.spacing == "log" and cfg.t_start <= 0:
        raise ConfigError(f"{rd.where('time', 'start')}: log spacing needs start > 0")
    cfg.output = rd.raw("output", "path")

    explicit = rd.raw("scan", "ratios")
    if explicit is not None:
        cfg.scan_ratios = rd.floats("scan", "ratios", [])
    else:
        lo = rd.float("scan", "ratio_min", 1e-3)
        hi = rd.float("scan", "ratio_max", 1e3)
        n = rd.int("scan", "points", 25)
        spacing = (rd.raw("scan", "spacing", "log") or "").lower()
        if n < 1:
            cfg.scan_ratios = []
        elif spacing == "log":
            if lo <= 0 or hi <= 0:
                raise ConfigError(f"{rd.where('scan', 'ratio_min')}: log grid bounds must be positive")
            cfg.scan_ratios = list(np.geomspace(lo, hi, n))
        else:
            cfg.scan_ratios = list(np.linspace(lo, hi, n))
    if not cfg.scan_ratios:
        raise ConfigError(f"{rd.where('scan', 'ratios' if explicit is not None else 'points')}: empty ratio grid")
    if any(r <= 0 for r in cfg.scan_ratios):
        raise ConfigError(f"{rd.where('scan', 'ratios')}: ratios must be positive")
    cfg.scan_k12 = rd.float("scan", "k12", 1.0, minimum=0.0)
    cfg.scan_k21 = rd.float("scan", "k21", 100.0, minimum=0.0)
    cfg.factor = rd.float("limits", "factor", 100.0, minimum=1.0)
    cfg.tol = rd.float("limits", "tol", 0.05, minimum=0.0)
    return cfg
