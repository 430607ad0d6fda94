"""Run configuration: TOML parsing, validation and round-trip output.

A configuration selects one run mode plus the pulse, comb, grid, metrics,
scan and output settings that mode needs.  Unknown keys are hard errors;
shorthand top-level keys (tau_p, S, M, k, xi_bar, ...) are accepted and
folded into their sections.  serialize() emits the fully resolved form,
and parse(serialize(cfg)) == cfg.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

try:
    import tomllib as _toml
except ImportError:  # Python < 3.11
    import tomli as _toml

import numpy as np

from .constants import FE57, PhysConstants
from .errors import ConfigError
from .io import toml_dumps
from .model import (
    CombSystem,
    MotionProfile,
    PulseSpec,
    TargetSpec,
    build_dynamical_doppler,
    build_dynamical_hybrid,
    build_flat_comb,
    build_shaped_comb,
    default_arrival_time,
)
from .solver import DEFAULT_NZ, Grid, auto_grid

MODES = ("analytic", "simulate", "scan-kxi", "scan-m", "scan-dyn", "scenario", "convergence")

_SHORTHAND = {
    "tau_p": ("pulse", "tau_p"),
    "tau_i": ("pulse", "tau_i"),
    "omega0": ("pulse", "omega0"),
    "S": ("comb", "s"),
    "s": ("comb", "s"),
    "M": ("comb", "m"),
    "m": ("comb", "m"),
    "k": ("comb", "k"),
    "xi_bar": ("comb", "xi_bar"),
    "total_xi": ("comb", "total_xi"),
    "builder": ("comb", "builder"),
    "variant": ("comb", "variant"),
    "tau_d": ("comb", "tau_d"),
    "b_d": ("comb", "b_d"),
}


@dataclass(frozen=True)
class PulseSection:
    tau_p: float | None = None  # required unless the mode has a default
    tau_i: float | None = None  # None: 5 pulse widths
    omega0: float = 1.0


@dataclass(frozen=True)
class TargetSection:
    xi: float = 0.0
    hyperfine: float = 0.0
    doppler_static: float = 0.0
    epsilon: int = 0
    tau_d: float = 0.0
    b_d: float = 1.0


@dataclass(frozen=True)
class CombSection:
    builder: str = "flat"  # flat | shaped | hybrid | doppler | explicit
    m: int = 1
    s: float = 50.0
    k: float = 0.0
    xi_bar: float | None = None
    total_xi: float | None = None
    variant: str = "M6"
    tau_d: float = 60.0
    b_d: float = 100.0
    targets: tuple[TargetSection, ...] = ()


@dataclass(frozen=True)
class GridSection:
    auto: bool = True
    dt: float | None = None
    t0: float = 0.0
    t1: float | None = None
    nz: int = DEFAULT_NZ


@dataclass(frozen=True)
class MetricsSection:
    shift_mode: str = "auto"
    window_t1: float | None = None
    window_t2: float | None = None


@dataclass(frozen=True)
class ScanSection:
    k_min: float = 0.0
    k_max: float = 1.0
    k_steps: int = 11
    xi_min: float = 0.0
    xi_max: float = 150.0
    xi_steps: int = 16
    m_list: tuple[int, ...] = (1, 3, 5, 7, 9, 11)
    xi_bar_min: float = 0.0
    xi_bar_max: float = 15.0
    xi_bar_step: float = 0.05
    dyn_xi_min: float = 0.0
    dyn_xi_max: float = 15.0
    dyn_xi_step: float = 0.4
    curves: str = "both"  # both | with | without
    save_traces: bool = False

    def __post_init__(self):
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))

    def k_grid(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.k_steps)

    def xi_grid(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.xi_steps)

    def dyn_grid(self) -> np.ndarray:
        return np.arange(self.dyn_xi_min, self.dyn_xi_max + 0.5 * self.dyn_xi_step, self.dyn_xi_step)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    scenario: str = ""
    threads: int = 1
    out_dir: str = "out"
    pulse: PulseSection = field(default_factory=PulseSection)
    comb: CombSection = field(default_factory=CombSection)
    grid: GridSection = field(default_factory=GridSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    scan: ScanSection = field(default_factory=ScanSection)


def _build_section(cls, mapping: dict, path: str):
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in mapping.items():
        if key not in known:
            raise ConfigError(f"unknown key {path}.{key}")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad value in [{path}]: {exc}") from exc


def _parse_mapping(data: dict) -> RunConfig:
    data = dict(data)
    sections: dict[str, dict] = {}
    for name in ("pulse", "comb", "grid", "metrics", "scan", "output"):
        raw = data.pop(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"[{name}] must be a table")
        sections[name] = dict(raw)

    mode = data.pop("mode", None)
    scenario = data.pop("scenario", "")
    threads = data.pop("threads", 1)
    for key in list(data):
        if key in _SHORTHAND:
            sec, target = _SHORTHAND[key]
            sections[sec].setdefault(target, data.pop(key))
    if data:
        raise ConfigError("unknown key " + ", ".join(sorted(map(str, data))))

    if mode is None:
        raise ConfigError("missing required key: mode")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    if mode == "scenario" and not scenario:
        raise ConfigError("scenario mode needs a scenario id (key: scenario)")
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError(f"threads must be a positive integer, got {threads!r}")

    out_raw = sections["output"]
    unknown_out = set(out_raw) - {"directory"}
    if unknown_out:
        raise ConfigError("unknown key output." + ", ".join(sorted(unknown_out)))
    out_dir = out_raw.get("directory", "out")

    raw_targets = sections["comb"].pop("targets", [])
    targets = tuple(
        _build_section(TargetSection, t, f"comb.targets[{i}]")
        for i, t in enumerate(raw_targets)
    )

    cfg = RunConfig(
        mode=mode,
        scenario=scenario,
        threads=threads,
        out_dir=str(out_dir),
        pulse=_build_section(PulseSection, sections["pulse"], "pulse"),
        comb=replace(_build_section(CombSection, sections["comb"], "comb"), targets=targets),
        grid=_build_section(GridSection, sections["grid"], "grid"),
        metrics=_build_section(MetricsSection, sections["metrics"], "metrics"),
        scan=_build_section(ScanSection, sections["scan"], "scan"),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    p = cfg.pulse
    if cfg.mode in ("analytic", "simulate", "convergence", "scan-kxi", "scan-m"):
        if p.tau_p is None:
            raise ConfigError(f"mode {cfg.mode} needs pulse.tau_p")
    if p.tau_p is not None and p.tau_p <= 0:
        raise ConfigError(f"pulse.tau_p must be positive, got {p.tau_p}")
    c = cfg.comb
    if cfg.mode in ("analytic", "simulate", "convergence", "scan-kxi", "scan-m"):
        if c.s <= 0:
            raise ConfigError(f"comb.s must be positive, got {c.s}")
    if c.builder not in ("flat", "shaped", "hybrid", "doppler", "explicit"):
        raise ConfigError(f"unknown comb.builder {c.builder!r}")
    if cfg.mode in ("analytic", "simulate", "convergence"):
        if c.builder in ("flat", "shaped"):
            if c.m < 1:
                raise ConfigError(f"comb.m must be >= 1, got {c.m}")
            if c.builder == "shaped" and c.m % 2 == 0:
                raise ConfigError(
                    f"comb.m must be odd for a shaped comb, got {c.m}"
                )
            if c.xi_bar is None and c.total_xi is None:
                raise ConfigError("comb needs xi_bar or total_xi")
            if (c.xi_bar is not None) and (c.total_xi is not None):
                raise ConfigError("give either comb.xi_bar or comb.total_xi, not both")
            xi = c.xi_bar if c.xi_bar is not None else c.total_xi
            if xi < 0:
                raise ConfigError(f"resonant thickness must be >= 0, got {xi}")
            if c.k < 0:
                raise ConfigError(f"comb.k must be >= 0, got {c.k}")
            if c.builder == "flat" and c.k != 0.0:
                raise ConfigError("comb.k only applies to builder = \"shaped\"")
        elif c.builder in ("hybrid", "doppler"):
            if c.xi_bar is None:
                raise ConfigError(f"{c.builder} comb needs xi_bar")
            allowed = ("M4", "M6") if c.builder == "hybrid" else ("M4", "M6", "M10")
            if c.variant.upper() not in allowed:
                raise ConfigError(
                    f"comb.variant for {c.builder} must be one of {', '.join(allowed)}"
                )
        elif c.builder == "explicit":
            if not c.targets:
                raise ConfigError("explicit comb needs at least one [[comb.targets]]")
            for i, t in enumerate(c.targets):
                if t.xi < 0:
                    raise ConfigError(f"comb.targets[{i}].xi must be >= 0, got {t.xi}")
                if t.epsilon not in (-1, 0, 1):
                    raise ConfigError(
                        f"comb.targets[{i}].epsilon must be -1, 0 or 1, got {t.epsilon}"
                    )
    if cfg.mode == "analytic" and c.builder in ("hybrid", "doppler"):
        raise ConfigError("the analytic mode covers only static flat/shaped combs")
    g = cfg.grid
    if not g.auto:
        if g.dt is None or g.t1 is None:
            raise ConfigError("manual grid needs dt and t1")
        if g.dt <= 0 or g.t1 <= g.t0:
            raise ConfigError("manual grid needs dt > 0 and t1 > t0")
    if g.nz < 1:
        raise ConfigError(f"grid.nz must be >= 1, got {g.nz}")
    m = cfg.metrics
    if m.shift_mode not in ("auto", "expected", "peak", "optimize"):
        raise ConfigError(f"unknown metrics.shift_mode {m.shift_mode!r}")
    if (m.window_t1 is None) != (m.window_t2 is None):
        raise ConfigError("metrics window override needs both window_t1 and window_t2")
    if m.window_t1 is not None and not m.window_t1 < m.window_t2:
        raise ConfigError("metrics.window_t1 must precede metrics.window_t2")
    s = cfg.scan
    if cfg.mode == "scan-kxi" and (s.k_steps < 1 or s.xi_steps < 1):
        raise ConfigError("scan-kxi needs k_steps >= 1 and xi_steps >= 1")
    if cfg.mode == "scan-m":
        if not s.m_list:
            raise ConfigError("scan-m needs a non-empty scan.m_list")
        bad = [m_ for m_ in s.m_list if m_ < 1 or m_ % 2 == 0]
        if bad:
            raise ConfigError(f"scan.m_list entries must be odd and positive: {bad}")
    if cfg.mode == "scan-dyn":
        if s.dyn_xi_step <= 0:
            raise ConfigError("scan.dyn_xi_step must be positive")
        if s.curves not in ("both", "with", "without"):
            raise ConfigError(f"scan.curves must be both, with or without, got {s.curves!r}")


def _apply_overrides(data: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        try:
            value = _toml.loads(f"v = {raw.strip()}")["v"]
        except Exception:
            value = raw.strip()
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-table")
        node[parts[-1]] = value
    return data


def parse_config(
    path=None, text: str | None = None, overrides: list[str] | None = None
) -> RunConfig:
    """Load, override and validate a configuration.

    Either a file path or raw TOML text must be given; --set style
    dotted-key overrides are applied before validation.
    """
    if (path is None) == (text is None):
        raise ConfigError("give either a config path or config text")
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        text = p.read_text(encoding="utf-8")
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return _parse_mapping(_apply_overrides(data, overrides or []))


def serialize_config(cfg: RunConfig) -> str:
    """Canonical TOML text; parse_config on it restores an equal config."""
    mapping = {
        "mode": cfg.mode,
        "threads": cfg.threads,
    }
    if cfg.scenario:
        mapping["scenario"] = cfg.scenario
    mapping["pulse"] = {k: v for k, v in asdict(cfg.pulse).items() if v is not None}
    comb = {k: v for k, v in asdict(cfg.comb).items() if v is not None and k != "targets"}
    if cfg.comb.targets:
        comb["targets"] = [asdict(t) for t in cfg.comb.targets]
    mapping["comb"] = comb
    mapping["grid"] = {k: v for k, v in asdict(cfg.grid).items() if v is not None}
    mapping["metrics"] = {k: v for k, v in asdict(cfg.metrics).items() if v is not None}
    mapping["scan"] = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg.scan).items()}
    mapping["output"] = {"directory": cfg.out_dir}
    return toml_dumps(mapping)


def make_pulse(cfg: RunConfig) -> PulseSpec:
    tau_p = cfg.pulse.tau_p
    if tau_p is None:
        raise ConfigError(f"mode {cfg.mode} needs pulse.tau_p")
    tau_i = cfg.pulse.tau_i
    if tau_i is None:
        tau_i = default_arrival_time(tau_p)
    return PulseSpec(tau_p=tau_p, tau_i=tau_i, omega0=cfg.pulse.omega0)


def make_comb(cfg: RunConfig, constants: PhysConstants = FE57) -> CombSystem:
    c = cfg.comb
    if c.builder == "flat":
        xi_bar = c.xi_bar if c.xi_bar is not None else c.total_xi / c.m
        return build_flat_comb(c.m, c.s, xi_bar)
    if c.builder == "shaped":
        total = c.total_xi if c.total_xi is not None else c.xi_bar * c.m
        return build_shaped_comb(c.m, c.s, c.k, cfg.pulse.tau_p, total, constants)
    if c.builder == "hybrid":
        return build_dynamical_hybrid(c.variant, c.s, c.xi_bar, c.tau_d, c.b_d)
    if c.builder == "doppler":
        return build_dynamical_doppler(c.variant, c.s, c.xi_bar, c.tau_d, c.b_d)
    targets = tuple(
        TargetSpec(
            xi=t.xi,
            hyperfine=t.hyperfine,
            doppler_static=t.doppler_static,
            motion=MotionProfile(
                epsilon=t.epsilon,
                tau_d=t.tau_d,
                b_d=t.b_d if t.epsilon != 0 else max(t.b_d, 1.0),
                s_units=c.s,
            ),
        )
        for t in c.targets
    )
    return CombSystem(targets=targets, spacing=c.s)


def make_grid(cfg: RunConfig, comb: CombSystem, pulse: PulseSpec, constants: PhysConstants = FE57) -> Grid:
    g = cfg.grid
    if g.auto:
        return auto_grid(comb, pulse, constants, t1=g.t1, nz=g.nz)
    return Grid(g.t0, g.t1, g.dt, g.nz)
