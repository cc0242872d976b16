"""Run configuration (INI) and tabular output (CSV with ``#`` header, or JSON).

Config sections::

    [system]   eta, g1, g2, gamma, delta, omega0, cross_sign
    [initial]  theta, phi
    [grid]     t_end, n_steps, solver, threads
    [sweep]    delta_min, delta_max, delta_step, epsilon, resolution
    [diagram]  eta_min, eta_max, eta_num, delta_min, delta_max, delta_num
    [output]   path, format

Sweep and diagram axes are in units of gamma. Missing keys take defaults.
"""
from __future__ import annotations

import configparser
import json
import math
import os
from dataclasses import dataclass, field, fields

import numpy as np

from .model import CrossSign, InitialState, Issue, SystemParams, TimeGrid, validate

ENV_PREFIX = "NMBATTERY_"
FORMATS = ("csv", "json")
SOLVER_NAMES = ("ode", "laplace", "quadrature")


class ConfigError(ValueError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass
class SweepConfig:
    delta_min: float = 0.0
    delta_max: float = 2.0
    delta_step: float = 0.05
    epsilon: float = 1e-6
    resolution: float = 0.01

    def deltas(self) -> np.ndarray:
        if self.delta_max == self.delta_min:
            return np.array([self.delta_min])
        n = int(round((self.delta_max - self.delta_min) / self.delta_step))
        return self.delta_min + self.delta_step * np.arange(n + 1)


@dataclass
class DiagramConfig:
    eta_min: float = 0.0
    eta_max: float = 2.0
    eta_num: int = 30
    delta_min: float = 0.0
    delta_max: float = 2.0
    delta_num: int = 30

    def etas(self) -> np.ndarray:
        return np.linspace(self.eta_min, self.eta_max, self.eta_num)

    def deltas(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.delta_num)


@dataclass
class GridConfig:
    t_end: float = 20.0
    n_steps: int = 8000
    solver: str = "ode"
    threads: int = 1


@dataclass
class OutputConfig:
    path: str = "-"
    format: str = "csv"


@dataclass
class RunConfig:
    system: SystemParams = field(default_factory=SystemParams)
    initial: InitialState = field(default_factory=InitialState)
    grid: GridConfig = field(default_factory=GridConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    diagram: DiagramConfig = field(default_factory=DiagramConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.grid.t_end, self.grid.n_steps)

    def to_flat(self) -> dict:
        """Section-qualified key/value pairs, e.g. ``{'system.eta': 1.5, ...}``."""
        flat = {}
        for section in SECTIONS:
            obj = getattr(self, section)
            for f in fields(obj):
                value = getattr(obj, f.name)
                if isinstance(value, CrossSign):
                    value = value.value
                flat[f"{section}.{f.name}"] = value
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "RunConfig":
        sections = {}
        for key, value in flat.items():
            section, _, name = key.partition(".")
            if section in SECTIONS:
                sections.setdefault(section, {})[name] = value
        return _build(sections)


SECTIONS = {
    "system": SystemParams,
    "initial": InitialState,
    "grid": GridConfig,
    "sweep": SweepConfig,
    "diagram": DiagramConfig,
    "output": OutputConfig,
}


def _coerce(section, name, raw, typ, issues):
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        if typ in ("int", int):
            value = int(raw)
        elif typ in ("float", float):
            value = float(raw)
        elif name == "cross_sign":
            value = CrossSign(raw)
        else:
            value = str(raw)
    except (TypeError, ValueError):
        issues.append(Issue(f"{section}.{name}", f"cannot parse {raw!r}"))
        return None
    return value


def _build(sections: dict) -> RunConfig:
    issues = []
    built = {}
    for section, cls_ in SECTIONS.items():
        raw = sections.get(section, {})
        known = {f.name: f for f in fields(cls_) if f.init}
        kwargs = {}
        for name, value in raw.items():
            if name not in known:
                issues.append(Issue(f"{section}.{name}", "unknown key"))
                continue
            typ = known[name].type
            v = _coerce(section, name, value, typ, issues)
            if v is not None:
                kwargs[name] = v
        try:
            built[section] = cls_(**kwargs)
        except (TypeError, ValueError) as exc:
            issues.append(Issue(section, str(exc)))
    for unknown in set(sections) - set(SECTIONS):
        issues.append(Issue(unknown, "unknown section"))
    if issues:
        raise ConfigError(issues)
    return RunConfig(**built)


def load_config(path: str | None) -> RunConfig:
    """Parse an INI config file; ``None`` gives the all-default config."""
    if path is None:
        return RunConfig()
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    return _build({s: dict(parser.items(s)) for s in parser.sections()})


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Apply ``{'grid.solver': 'laplace', ...}`` on top of ``cfg``."""
    flat = cfg.to_flat()
    flat.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_flat(flat)


def env_overrides(environ=None) -> dict:
    """Overrides from ``NMBATTERY_SOLVER``, ``_THREADS``, ``_FORMAT``, ``_OUT``, ``_CROSS_SIGN``."""
    environ = os.environ if environ is None else environ
    mapping = {
        "SOLVER": "grid.solver",
        "THREADS": "grid.threads",
        "FORMAT": "output.format",
        "OUT": "output.path",
        "CROSS_SIGN": "system.cross_sign",
    }
    return {key: environ[ENV_PREFIX + var] for var, key in mapping.items()
            if ENV_PREFIX + var in environ}


def check_config(cfg: RunConfig, command: str | None = None) -> list[Issue]:
    """Every problem with ``cfg``; field names are section-qualified."""
    issues = [Issue(f"system.{i.field}", i.message) for i in validate(cfg.system)]
    g = cfg.grid
    if not (math.isfinite(g.t_end) and g.t_end > 0):
        issues.append(Issue("grid.t_end", "must be positive"))
    if g.n_steps < 2:
        issues.append(Issue("grid.n_steps", "must be >= 2"))
    if g.solver not in SOLVER_NAMES:
        issues.append(Issue("grid.solver", f"must be one of {', '.join(SOLVER_NAMES)}"))
    if g.threads < 0:
        issues.append(Issue("grid.threads", "must be >= 0 (0 = auto)"))
    if cfg.output.format not in FORMATS:
        issues.append(Issue("output.format", "must be csv or json"))
    for name in ("theta", "phi"):
        if not math.isfinite(getattr(cfg.initial, name)):
            issues.append(Issue(f"initial.{name}", "must be finite"))
    if command == "sweep":
        s = cfg.sweep
        if s.delta_min > s.delta_max:
            issues.append(Issue("sweep.delta_min", "must not exceed sweep.delta_max"))
        if s.delta_step <= 0:
            issues.append(Issue("sweep.delta_step", "must be positive"))
        if s.epsilon <= 0:
            issues.append(Issue("sweep.epsilon", "must be positive"))
        if s.resolution <= 0:
            issues.append(Issue("sweep.resolution", "must be positive"))
    if command == "phase-diagram":
        d = cfg.diagram
        for ax in ("eta", "delta"):
            lo, hi, num = getattr(d, f"{ax}_min"), getattr(d, f"{ax}_max"), getattr(d, f"{ax}_num")
            if lo > hi:
                issues.append(Issue(f"diagram.{ax}_min", f"must not exceed diagram.{ax}_max"))
            if num < 1:
                issues.append(Issue(f"diagram.{ax}_num", "must be >= 1"))
            elif num > 1 and lo == hi:
                issues.append(Issue(f"diagram.{ax}_num", "must be 1 when min == max"))
    return issues


def fmt_number(x) -> str:
    """15 significant digits, locale independent."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.15g}"


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(fmt_number(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_table(path, meta: dict, columns: list[str], rows, fmt: str = "csv",
                trailer: dict | None = None, stream=None) -> None:
    """Write rows with a metadata header (and optional trailer block).

    CSV: ``# key = <json value>`` lines, a header row, data, then trailer
    lines. JSON: ``{"meta": ..., "columns": ..., "rows": ..., "trailer": ...}``.
    """
    if fmt == "csv":
        lines = [f"# {k} = {json.dumps(_json_value(v))}" for k, v in meta.items()]
        lines.append(",".join(columns))
        lines.extend(",".join(fmt_number(x) for x in row) for row in rows)
        for k, v in (trailer or {}).items():
            lines.append(f"# {k} = {json.dumps(_json_value(v))}")
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        doc = {
            "meta": {k: _json_value(v) for k, v in meta.items()},
            "columns": list(columns),
            "rows": [[_json_value(x) if not isinstance(x, str) else x for x in row]
                     for row in rows],
            "trailer": {k: _json_value(v) for k, v in (trailer or {}).items()},
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path in (None, "-"):
        (stream or _stdout()).write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _stdout():
    import sys
    return sys.stdout


def read_table(path):
    """Inverse of :func:`write_table`; returns (meta, columns, rows, trailer)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        rows = [[float("nan") if x is None else x for x in row] for row in doc["rows"]]
        return doc["meta"], doc["columns"], rows, doc.get("trailer", {})
    meta, trailer, rows, columns = {}, {}, [], None
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            (meta if columns is None else trailer)[key.strip()] = json.loads(value)
        elif columns is None:
            columns = line.split(",")
        elif line:
            rows.append([_parse_cell(c) for c in line.split(",")])
    return meta, columns, rows, trailer


def _parse_cell(cell):
    try:
        return float(cell)
    except ValueError:
        return cell
