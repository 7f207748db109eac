"""Flat key/value run configuration.

Configuration documents are UTF-8 text with ``#`` comments and one
``section.key = value`` assignment per line (one dot level only).  Unknown
keys are rejected; every value is validated with an error naming the
offending key.  Defaults depend on the scenario: 2D scenarios start from
the square-domain parameter set, the 1D bar from the stretched-bar set.
Serialization uses shortest round-trippable decimals so that
parse(serialize(cfg)) reproduces cfg exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .experiments import BAR_MATERIAL, PRESETS, SQUARE_MATERIAL

SCENARIOS = (
    "profile-1d", "bar-1d", "recovery-check",
    "square-2d", "lshape-2d", "domain-trace",
)


class ConfigError(ValueError):
    """Malformed configuration document or invalid value."""


@dataclass
class RunConfig:
    """Fully resolved run configuration (defaults already applied)."""

    scenario: str
    preset: str = "full"
    # mesh
    h: float = 0.0
    eps_h: float = 0.0
    diag: str = "A"
    length: float = 1.0
    refinement: float = 0.0  # 0 = none
    # material
    E0: float = 0.0
    nu: float = -1.0  # -1 = unset (1D scenarios)
    G_c: float = 0.0
    sigma_c: float = 0.0  # 0 = unset
    p_c: float = 0.0
    tau_c: float = 0.0
    convention: str = "3d"
    # loading
    Ux: float = 0.0
    Uy: float = 0.0
    u_max: float = 0.0
    steps: int = 0
    # solver
    tol: float = 1e-8
    max_iter: int = 20000
    # output
    out_dir: str = "out"
    stride: int = 0
    seed: int = 0


#: config key -> (RunConfig attribute, type)
_KEYMAP = {
    "scenario": ("scenario", str),
    "run.preset": ("preset", str),
    "run.seed": ("seed", int),
    "mesh.h": ("h", float),
    "mesh.eps_h": ("eps_h", float),
    "mesh.diag": ("diag", str),
    "mesh.length": ("length", float),
    "mesh.refinement": ("refinement", float),
    "material.E0": ("E0", float),
    "material.nu": ("nu", float),
    "material.G_c": ("G_c", float),
    "material.sigma_c": ("sigma_c", float),
    "material.p_c": ("p_c", float),
    "material.tau_c": ("tau_c", float),
    "material.eps_h": ("eps_h", float),
    "material.convention": ("convention", str),
    "load.Ux": ("Ux", float),
    "load.Uy": ("Uy", float),
    "load.u_max": ("u_max", float),
    "load.steps": ("steps", int),
    "solver.tol": ("tol", float),
    "solver.max_iter": ("max_iter", int),
    "output.dir": ("out_dir", str),
    "output.stride": ("stride", int),
}

_POSITIVE_KEYS = {
    "mesh.h", "mesh.eps_h", "material.E0", "material.G_c", "material.sigma_c",
    "material.p_c", "material.tau_c", "material.eps_h", "load.steps",
    "solver.tol", "solver.max_iter",
}

_CHOICES = {
    "scenario": SCENARIOS,
    "run.preset": ("full", "reduced"),
    "mesh.diag": ("A", "B"),
    "material.convention": ("2d", "3d"),
}


def scenario_defaults(scenario: str, preset: str = "full") -> RunConfig:
    """Built-in parameters for a scenario at a given preset."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    if preset not in ("full", "reduced"):
        raise ConfigError(f"unknown preset {preset!r}")
    cfg = RunConfig(scenario=scenario, preset=preset)
    if scenario in ("square-2d", "lshape-2d", "domain-trace"):
        cfg.E0 = SQUARE_MATERIAL["E0"]
        cfg.nu = SQUARE_MATERIAL["nu"]
        cfg.G_c = SQUARE_MATERIAL["G_c"]
        cfg.p_c = SQUARE_MATERIAL["p_c"]
        cfg.tau_c = SQUARE_MATERIAL["tau_c"]
        cfg.h = PRESETS[preset]["h"]
        cfg.eps_h = PRESETS[preset]["eps_h"]
        cfg.steps = PRESETS[preset]["steps"]
        cfg.length = 1.0
        if scenario == "square-2d":
            cfg.Ux, cfg.Uy = 0.5, -0.45
        elif scenario == "lshape-2d":
            cfg.u_max = 0.018
            cfg.Ux = cfg.Uy = cfg.u_max
            cfg.steps = 6
        else:
            cfg.steps = 100
    else:
        cfg.E0 = BAR_MATERIAL["E0"]
        cfg.G_c = BAR_MATERIAL["G_c"]
        cfg.sigma_c = BAR_MATERIAL["sigma_c"]
        cfg.eps_h = BAR_MATERIAL["eps_h"]
        cfg.h = cfg.eps_h / 5.0
        cfg.length = 2.0
        cfg.steps = 50
        cfg.u_max = 5e-3
        cfg.refinement = 1.0 / 25.0
        if scenario == "recovery-check":
            cfg.steps = 4  # refinement levels
    return cfg


def parse_config(text: str, scenario: str | None = None,
                 preset: str | None = None) -> RunConfig:
    """Parse a flat configuration document into a validated RunConfig.

    ``scenario`` / ``preset`` seed the defaults; a ``scenario`` key inside
    the document must agree with the argument when both are given.
    """
    assignments: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYMAP:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in assignments:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        assignments[key] = value

    doc_scenario = assignments.get("scenario")
    if scenario is None:
        scenario = doc_scenario
    elif doc_scenario is not None and doc_scenario != scenario:
        raise ConfigError(
            f"scenario: document says {doc_scenario!r}, caller says {scenario!r}")
    if scenario is None:
        raise ConfigError("scenario: missing (no subcommand and no 'scenario' key)")
    if preset is None:
        preset = assignments.get("run.preset", "full")
    cfg = scenario_defaults(scenario, preset)

    for key, raw_value in assignments.items():
        attr, typ = _KEYMAP[key]
        if key == "scenario":
            continue
        try:
            value = typ(raw_value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {raw_value!r} is not a valid {typ.__name__}") \
                from exc
        if key in _CHOICES and value not in _CHOICES[key]:
            raise ConfigError(f"{key}: must be one of {_CHOICES[key]}")
        if key in _POSITIVE_KEYS and not value > 0:
            raise ConfigError(f"{key}: must be strictly positive")
        setattr(cfg, attr, value)

    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.h <= 0:
        raise ConfigError("mesh.h: must be strictly positive")
    if cfg.eps_h <= 0:
        raise ConfigError("material.eps_h: must be strictly positive")
    if cfg.scenario in ("square-2d", "lshape-2d") and cfg.h > cfg.eps_h / 2:
        raise ConfigError("mesh.h: must not exceed material.eps_h / 2")
    if cfg.nu >= 0.5:
        raise ConfigError("material.nu: must be below 0.5")
    if cfg.steps <= 0:
        raise ConfigError("load.steps: must be strictly positive")
    if cfg.tol <= 0:
        raise ConfigError("solver.tol: must be strictly positive")


#: sentinel values marking "parameter not used by this scenario"
_UNSET = {
    "material.E0": 0.0, "material.nu": -1.0, "material.sigma_c": 0.0,
    "material.p_c": 0.0, "material.tau_c": 0.0, "load.u_max": 0.0,
    "mesh.refinement": 0.0,
}


def serialize_config(cfg: RunConfig) -> str:
    """Render a RunConfig as a parseable document (exact round trip)."""
    lines = [f"scenario = {cfg.scenario}"]
    for key in sorted(k for k in _KEYMAP if k != "scenario"):
        attr, typ = _KEYMAP[key]
        if key == "material.eps_h":  # mesh.eps_h is the canonical spelling
            continue
        value = getattr(cfg, attr)
        if key in _UNSET and value == _UNSET[key]:
            continue
        lines.append(f"{key} = {repr(value) if typ is float else value}")
    return "\n".join(lines) + "\n"


def material_from_config(cfg: RunConfig):
    """Build MaterialParams for the scenario described by cfg."""
    from .energetics import MaterialParams

    kw = dict(G_c=cfg.G_c, eps_h=cfg.eps_h, h=cfg.h, E0=cfg.E0,
              voldev_convention=cfg.convention)
    if cfg.nu >= 0:
        kw["nu"] = cfg.nu
    if cfg.sigma_c > 0:
        kw["sigma_c"] = cfg.sigma_c
    if cfg.p_c > 0:
        kw["p_c"] = cfg.p_c
    if cfg.tau_c > 0:
        kw["tau_c"] = cfg.tau_c
    return MaterialParams(**kw)
