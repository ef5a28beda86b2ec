"""Run configuration read from a TOML file, with dotted-key overrides.

Schema (all keys optional unless noted, defaults in brackets)::

    [physical]            # T, mu, lambda of the plasma
    T = 1.0               # required when [physical] is present
    mu = 1.0
    lam = 1.0

    [scaled]              # scaled regime mu = eps*mu_bar, lam = sqrt(eps)*lambda_bar
    epsilon = 0.02        # required when [scaled] is present
    mu_bar = 1.0
    lambda_bar = 1.0
    T = 0.0               # needed only when [physical] is absent

    [grid]
    nodes = 8001          # Eulerian profile nodes
    L_factor = 40.0       # Eulerian half-length in units of 1/rate
    dy = 1.0              # Lagrangian spacing
    L_left = 0            # 0 selects the length from the run duration
    L_right = 1000.0

    [solver]
    tol = 1e-10
    max_iter = 30
    cfl = 0.4

    [evolve]
    jump = 0.05           # v+ - v-, sets the amplitude epsilon
    E0 = 1e-3             # initial energy, sets the perturbation amplitude
    amplitude = 0         # used instead of E0 when nonzero
    width = 10.0
    center = 0.0
    shape = "derivative-of-bump"
    t_end = 2000.0
    sample_every = 1.0
    snapshot_every = 500.0
    doubling = true       # run to 2*t_end so growth of E + int D can be checked

    [output]
    dir = "traj"
"""

from dataclasses import dataclass, field, asdict, fields, replace
import math
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .rankine_hugoniot import PlasmaParams, ScalingParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalBlock:
    T: float
    mu: float = 1.0
    lam: float = 1.0


@dataclass(frozen=True)
class ScaledBlock:
    epsilon: float
    mu_bar: float = 1.0
    lambda_bar: float = 1.0
    T: float | None = None


@dataclass(frozen=True)
class GridBlock:
    nodes: int = 8001
    L_factor: float = 40.0
    dy: float = 1.0
    L_left: float = 0.0
    L_right: float = 1000.0


@dataclass(frozen=True)
class SolverBlock:
    tol: float = 1e-10
    max_iter: int = 30
    cfl: float = 0.4


@dataclass(frozen=True)
class EvolveBlock:
    jump: float = 0.05
    E0: float = 1e-3
    amplitude: float = 0.0
    width: float = 10.0
    center: float = 0.0
    shape: str = "derivative-of-bump"
    t_end: float = 2000.0
    sample_every: float = 1.0
    snapshot_every: float = 500.0
    doubling: bool = True


@dataclass(frozen=True)
class OutputBlock:
    dir: str = "traj"


@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalBlock | None = None
    scaled: ScaledBlock | None = None
    grid: GridBlock = field(default_factory=GridBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    evolve: EvolveBlock = field(default_factory=EvolveBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def __post_init__(self):
        if self.physical is None and self.scaled is None:
            raise ConfigError("config needs a [physical] or a [scaled] block")
        if self.physical is None and self.scaled.T is None:
            raise ConfigError("[scaled] without [physical] must give T")
        if self.physical is not None and self.scaled is not None:
            eps = self.scaled.epsilon
            mu = eps * self.scaled.mu_bar
            lam = math.sqrt(eps) * self.scaled.lambda_bar
            p = self.physical
            if not (math.isclose(p.mu, mu, rel_tol=1e-12) and math.isclose(p.lam, lam, rel_tol=1e-12)):
                raise ConfigError(
                    f"inconsistent blocks: mu={p.mu}, lam={p.lam} but eps*mu_bar={mu}, sqrt(eps)*lambda_bar={lam}"
                )
            if self.scaled.T is not None and not math.isclose(self.scaled.T, p.T, rel_tol=1e-12):
                raise ConfigError("[physical] and [scaled] give different T")
        # the dataclass constructors validate ranges
        self.plasma()

    def plasma(self):
        if self.physical is not None:
            p = self.physical
            return PlasmaParams(p.T, p.mu, p.lam)
        sc = self.scaled
        return ScalingParams(sc.epsilon, sc.mu_bar, sc.lambda_bar).physical(sc.T)

    def to_dict(self):
        return asdict(self)

    def flat(self):
        """Flattened ``section.key -> value`` view, used for output headers."""
        out = {}
        for section, values in self.to_dict().items():
            if values is None:
                continue
            for k, v in values.items():
                out[f"{section}.{k}"] = v
        return out


_BLOCKS = {
    "physical": PhysicalBlock,
    "scaled": ScaledBlock,
    "grid": GridBlock,
    "solver": SolverBlock,
    "evolve": EvolveBlock,
    "output": OutputBlock,
}


def _coerce(cls, name, value):
    ftype = {f.name: f.type for f in fields(cls)}[name]
    text = str(ftype)
    if text.startswith("bool") or ftype is bool:
        if isinstance(value, str):
            if value.lower() not in ("true", "false", "1", "0"):
                raise ConfigError(f"{cls.__name__}.{name}: expected a boolean, got {value!r}")
            return value.lower() in ("true", "1")
        return bool(value)
    if text.startswith("int") or ftype is int:
        return int(value)
    if text.startswith("str") or ftype is str:
        return str(value)
    return None if value is None else float(value)


def _block(cls, values, section):
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    try:
        return cls(**{k: _coerce(cls, k, v) for k, v in values.items()})
    except TypeError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def from_dict(data):
    unknown = set(data) - set(_BLOCKS)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    kwargs = {name: _block(cls, data[name], name) for name, cls in _BLOCKS.items() if name in data}
    try:
        return RunConfig(**kwargs)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def apply_overrides(data, overrides):
    """Apply ``section.key=value`` strings to a raw config dict."""
    data = {k: dict(v) for k, v in data.items()}
    for item in overrides or ():
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        key, value = item.split("=", 1)
        section, name = key.split(".", 1)
        data.setdefault(section, {})[name] = value
    return data


def load_config(path=None, overrides=None):
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return from_dict(apply_overrides(data, overrides))


def with_override(config, key, value):
    """Copy of ``config`` with one dotted key replaced."""
    section, name = key.split(".", 1)
    block = getattr(config, section)
    if block is None:
        raise ConfigError(f"section [{section}] is not present")
    return replace(config, **{section: replace(block, **{name: _coerce(type(block), name, value)})})
