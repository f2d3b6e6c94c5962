"""Run configuration: a flat ``key = value`` text format.

Example::

    # lattice
    wavelength = 866 nm
    depth      = 850 ER
    mass       = 132.905451961 u
    distance   = 0.5 lambda
    n          = 0
    # noise
    channels   = accordion, amplitude, position
    D          = 1 T0
    tau        = 0, 1 T0, 10 T0
    T          = logspace(0.1, 100, 61)
    # Monte-Carlo
    mc_paths   = 0
    seed       = 2021

``#`` starts a comment. Quantities take a unit after the number; a bare
``0`` is accepted for ``tau``. ``T`` grids are in units of the trap period
``T0`` and may be a comma list, ``logspace(a, b, n)`` or ``linspace(a, b, n)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .constants import ATOMIC_MASS_UNIT
from .errors import ConfigParseError, InvalidConfigError
from .lattice import DerivedParams, LatticeConfig, derive_params
from .noise import Channel

__all__ = ["RunConfig", "parse_config", "load_config"]

_LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_MASS = {"kg": 1.0, "u": ATOMIC_MASS_UNIT}


@dataclass(frozen=True)
class RunConfig:
    """Validated sweep configuration, SI units except where noted.

    ``taus`` and ``T_grid`` are in units of the trap period ``T0``; a zero
    ``tau`` selects white noise.
    """

    wavelength: float
    depth: float
    mass: float
    distance: float
    T_grid: tuple
    n: int = 0
    channels: tuple = (Channel.ACCORDION, Channel.AMPLITUDE, Channel.POSITION)
    D: float | None = None
    taus: tuple = (0.0,)
    correlation_csv: str | None = None
    mc_paths: int = 0
    seed: int | None = None
    points_per_T0: int = 1000
    lambdas: tuple = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)
    nonlinear_paths: int = 200
    verify_T: tuple = (3.0,)
    verify_paths: int = 10_000
    verify_nsigma: float = 3.0
    exponent_tol: float = 0.05
    nsigma_flag: float = 5.0
    quad_rtol: float = 1e-8
    white_tau_threshold: float = 1e-6
    output_csv: str | None = None
    output_json: str | None = None
    verify_json: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.D is None:
            object.__setattr__(self, "D", self.params.period)
        if not self.T_grid:
            raise InvalidConfigError("T grid is empty")
        if any(not (x > 0 and math.isfinite(x)) for x in self.T_grid):
            raise InvalidConfigError("T grid values must be positive")
        if not self.taus:
            raise InvalidConfigError("tau list is empty")
        if any(not (x >= 0 and math.isfinite(x)) for x in self.taus):
            raise InvalidConfigError("tau values must be non-negative")
        if not self.channels:
            raise InvalidConfigError("channel list is empty")
        if not self.D >= 0:
            raise InvalidConfigError("noise strength D must be non-negative")
        if self.n < 0:
            raise InvalidConfigError("mode index n must be non-negative")
        if self.mc_paths and self.seed is None:
            raise InvalidConfigError("a seed is required when mc_paths > 0")
        if self.mc_paths and self.mc_paths < 100:
            raise InvalidConfigError("mc_paths must be 0 or at least 100")
        if self.points_per_T0 < 20:
            raise InvalidConfigError("points_per_T0 must be at least 20")

    @property
    def lattice(self) -> LatticeConfig:
        return LatticeConfig(self.wavelength, self.depth, self.mass, self.distance)

    @property
    def params(self) -> DerivedParams:
        return derive_params(self.lattice)

    @property
    def taus_seconds(self):
        T0 = self.params.period
        return tuple(t * T0 for t in self.taus)

    def to_dict(self):
        out = asdict(self)
        out["channels"] = [c.value for c in self.channels]
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown keys {sorted(unknown)}")
        data["channels"] = tuple(Channel(c) for c in data.get("channels", [c.value for c in Channel]))
        for key, value in data.items():
            if isinstance(value, list):
                data[key] = tuple(value)
        return cls(**data)

    def to_text(self) -> str:
        """Canonical text form; ``parse_config(cfg.to_text()) == cfg``."""
        r = repr
        lines = [
            "# lattice_shuttle run configuration (SI units)",
            f"wavelength = {r(self.wavelength)} m",
            f"depth = {r(self.depth)} J",
            f"mass = {r(self.mass)} kg",
            f"distance = {r(self.distance)} m",
            f"n = {self.n}",
            f"channels = {', '.join(c.value for c in self.channels)}",
            f"D = {r(self.D)} s",
            f"tau = {', '.join(f'{r(t)} T0' for t in self.taus)}",
            f"T = {', '.join(r(t) for t in self.T_grid)}",
            f"mc_paths = {self.mc_paths}",
            f"points_per_T0 = {self.points_per_T0}",
            f"lambdas = {', '.join(r(x) for x in self.lambdas)}",
            f"nonlinear_paths = {self.nonlinear_paths}",
            f"verify_T = {', '.join(r(t) for t in self.verify_T)}",
            f"verify_paths = {self.verify_paths}",
            f"verify_nsigma = {r(self.verify_nsigma)}",
            f"exponent_tol = {r(self.exponent_tol)}",
            f"nsigma_flag = {r(self.nsigma_flag)}",
            f"quad_rtol = {r(self.quad_rtol)}",
            f"white_tau_threshold = {r(self.white_tau_threshold)} T0",
        ]
        for key in ("seed", "workers"):
            if getattr(self, key) is not None:
                lines.append(f"{key} = {getattr(self, key)}")
        for key in ("correlation_csv", "output_csv", "output_json", "verify_json"):
            if getattr(self, key) is not None:
                lines.append(f"{key} = {getattr(self, key)}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*([A-Za-z0-9_/]*)\s*$")
_SPACE = re.compile(r"^\s*(log|lin)space\s*\(([^)]*)\)\s*(T0)?\s*$")

_KEYS = {
    "wavelength", "depth", "mass", "distance", "n", "channels", "D", "tau", "T",
    "correlation_csv", "mc_paths", "seed", "points_per_T0", "lambdas", "nonlinear_paths",
    "verify_T", "verify_paths", "verify_nsigma", "exponent_tol", "nsigma_flag", "quad_rtol",
    "white_tau_threshold", "output_csv", "output_json", "verify_json", "workers",
}
_REQUIRED = ("wavelength", "depth", "mass", "T")


def _quantity(text, lineno, units, key, bare_zero=False):
    m = _QUANTITY.match(text)
    if not m:
        raise ConfigParseError(f"{key}: cannot read quantity {text.strip()!r}", lineno)
    value, unit = float(m.group(1)), m.group(2)
    if not unit:
        if bare_zero and value == 0:
            return 0.0, None
        if None in units:
            return value, None
        raise ConfigParseError(f"{key}: missing unit (expected one of {sorted(u for u in units if u)})", lineno)
    if unit not in units:
        raise ConfigParseError(f"{key}: unit {unit!r} not allowed (expected one of {sorted(u for u in units if u)})", lineno)
    return value, unit


def _number(text, lineno, key, kind=float):
    try:
        value = kind(text.strip())
    except ValueError:
        raise ConfigParseError(f"{key}: expected {kind.__name__}, got {text.strip()!r}", lineno) from None
    if kind is float and not math.isfinite(value):
        raise ConfigParseError(f"{key}: value must be finite", lineno)
    return value


def _split(text):
    return [item for item in (part.strip() for part in text.split(",")) if item]


def _grid(text, lineno, key):
    """T0-unit grid: list or log/linspace."""
    m = _SPACE.match(text)
    if m:
        args = _split(m.group(2))
        if len(args) != 3:
            raise ConfigParseError(f"{key}: {m.group(1)}space needs (start, stop, count)", lineno)
        a, b = (_number(x, lineno, key) for x in args[:2])
        count = _number(args[2], lineno, key, int)
        if count < 1:
            return ()
        if m.group(1) == "log":
            if a <= 0 or b <= 0:
                raise ConfigParseError(f"{key}: logspace bounds must be positive", lineno)
            values = np.geomspace(a, b, count)
        else:
            values = np.linspace(a, b, count)
        return tuple(float(v) for v in values)
    out = []
    for item in _split(text):
        value, _ = _quantity(item, lineno, {None, "T0"}, key)
        out.append(value)
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text; errors carry the line number."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError(f"expected 'key = value', got {body!r}", lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigParseError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigParseError(f"duplicate key {key!r} (first on line {raw[key][1]})", lineno)
        if not value:
            raise ConfigParseError(f"{key}: empty value", lineno)
        raw[key] = (value, lineno)
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigParseError(f"missing required key {key!r}")

    def get(key):
        return raw[key] if key in raw else (None, None)

    text_, ln = get("wavelength")
    v, unit = _quantity(text_, ln, _LENGTH, "wavelength")
    wavelength = v * _LENGTH[unit]
    text_, ln = get("mass")
    v, unit = _quantity(text_, ln, _MASS, "mass")
    mass = v * _MASS[unit]
    text_, ln = get("depth")
    v, unit = _quantity(text_, ln, {"J", "ER"}, "depth")
    try:
        lattice = (LatticeConfig.from_recoil(wavelength, v, mass) if unit == "ER"
                   else LatticeConfig(wavelength, v, mass))
    except InvalidConfigError as exc:
        raise ConfigParseError(str(exc), ln) from None
    depth = lattice.depth
    distance = 0.5 * wavelength
    if "distance" in raw:
        text_, ln = raw["distance"]
        v, unit = _quantity(text_, ln, set(_LENGTH) | {"lambda"}, "distance")
        distance = v * (wavelength if unit == "lambda" else _LENGTH[unit])
    T0 = derive_params(LatticeConfig(wavelength, depth, mass, distance)).period

    def duration(text_, ln, key, bare_zero=False):
        value, unit = _quantity(text_, ln, set(_TIME) | {"T0"}, key, bare_zero)
        if unit is None:
            return 0.0
        return value * T0 if unit == "T0" else value * _TIME[unit]

    def in_T0(text_, ln, key):
        # T0-unit values stay exact rather than going through seconds
        value, unit = _quantity(text_, ln, set(_TIME) | {"T0"}, key, True)
        if unit is None:
            return 0.0
        return value if unit == "T0" else value * _TIME[unit] / T0

    kwargs = dict(wavelength=wavelength, depth=depth, mass=mass, distance=distance)
    text_, ln = raw["T"]
    kwargs["T_grid"] = _grid(text_, ln, "T")
    if not kwargs["T_grid"]:
        raise ConfigParseError("T: grid is empty", ln)
    for key, kind in (("n", int), ("mc_paths", int), ("seed", int), ("points_per_T0", int),
                      ("nonlinear_paths", int), ("verify_paths", int), ("workers", int),
                      ("verify_nsigma", float), ("exponent_tol", float), ("nsigma_flag", float),
                      ("quad_rtol", float)):
        if key in raw:
            kwargs[key] = _number(raw[key][0], raw[key][1], key, kind)
    if "channels" in raw:
        text_, ln = raw["channels"]
        try:
            kwargs["channels"] = tuple(Channel(c) for c in _split(text_))
        except ValueError as exc:
            raise ConfigParseError(f"channels: {exc}", ln) from None
    if "D" in raw:
        kwargs["D"] = duration(*raw["D"], "D")
    if "tau" in raw:
        text_, ln = raw["tau"]
        kwargs["taus"] = tuple(in_T0(item, ln, "tau") for item in _split(text_))
    if "white_tau_threshold" in raw:
        kwargs["white_tau_threshold"] = in_T0(*raw["white_tau_threshold"], "white_tau_threshold")
    for key in ("lambdas", "verify_T"):
        if key in raw:
            kwargs[key] = tuple(_number(x, raw[key][1], key) for x in _split(raw[key][0]))
    for key in ("correlation_csv", "output_csv", "output_json", "verify_json"):
        if key in raw:
            kwargs[key] = raw[key][0]
    try:
        return RunConfig(**kwargs)
    except InvalidConfigError as exc:
        raise ConfigParseError(str(exc)) from None


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
