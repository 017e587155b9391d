"""Scenario configuration files.

The format is INI-style (``configparser``): ``key = value`` lines grouped in
sections. Lengths are metres unless suffixed with ``nm``, ``um``/``µm``,
``mm``, ``cm`` or ``m``. Angles are radians and may be written as multiples
of pi (``3pi/4``, ``1.25 pi``, ``pi/2``). Example::

    [scenario]
    name = intermediate-violation
    seed = 1
    events = 1000000

    [source]
    sigma_plus_sq = 47
    sigma_minus_sq = 0.006

    [optics]
    wavelength = 810 nm
    f_prime = 17.67766952966369 cm
    imaging_focal = 25 cm
    signal_stages = 3

    [detector]
    slit_width = 100 um
    step = 50 um
    n_steps = auto

Instead of ``sigma_plus_sq``/``sigma_minus_sq`` the ``[source]`` section may
give ``pump_waist``, ``crystal_length`` and ``pump_wavelength``; the
down-converted wavelength and ``f_prime`` are then taken from ``[optics]``.
The ``custom`` scenario reads ``signal_angle`` and ``idler_angle`` from
``[optics]`` or, alternatively, explicit lens systems as multi-line
``signal_system``/``idler_system`` values in the :class:`LensSystem` text
format.
"""

from __future__ import annotations

import configparser
import io
import math
import re
from dataclasses import dataclass, field

from .exceptions import ConfigurationError, InvalidParameterError
from .gaussian import SourceParameters
from .optics import LensSystem

SCENARIOS = (
    "source-check",
    "intermediate-null",
    "intermediate-violation",
    "migration-scan",
    "perturbation-study",
    "custom",
)

# 0.455 D/K is the difference-coordinate width of the phase-matching function
PHASE_MATCHING_FACTOR = 0.455

_UNITS = {"nm": 1e-9, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "mm": 1e-3, "cm": 1e-2, "m": 1.0}
_LENGTH_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zµμ]*)\s*$")
_ANGLE_RE = re.compile(r"^\s*([-+]?[0-9.eE]*)\s*\*?\s*(pi|π)?\s*(?:/\s*([0-9.eE]+))?\s*$")


def parse_length(text) -> float:
    """``"100 um"`` -> ``1e-4``. Bare numbers are metres."""
    if isinstance(text, (int, float)):
        return float(text)
    match = _LENGTH_RE.match(str(text))
    if not match or match.group(2) not in _UNITS and match.group(2) != "":
        raise ConfigurationError(f"cannot parse length {text!r}")
    try:
        value = float(match.group(1))
    except ValueError:
        raise ConfigurationError(f"cannot parse length {text!r}")
    return value * _UNITS.get(match.group(2) or "m")


def parse_angle(text) -> float:
    """Radians from ``"0.3"``, ``"pi/2"``, ``"3pi/4"``, ``"1.25 pi"`` or ``"5*pi/4"``."""
    if isinstance(text, (int, float)):
        return float(text)
    match = _ANGLE_RE.match(str(text))
    if not match or (not match.group(1) and not match.group(2)):
        raise ConfigurationError(f"cannot parse angle {text!r}")
    coeff, has_pi, denom = match.groups()
    try:
        value = float(coeff) if coeff not in ("", "+", "-") else float(coeff + "1")
        if has_pi:
            value *= math.pi
        if denom:
            value /= float(denom)
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"cannot parse angle {text!r}")
    return value


def resolve_source(
    pump_waist: float,
    crystal_length: float,
    pump_wavelength: float,
    wavelength: float,
    f_prime: float,
) -> SourceParameters:
    """Dimensionless source widths from physical parameters.

    ``sigma_plus^2 = 4 w^2 k / f'`` and
    ``sigma_minus^2 = (k / f') 0.455 D / K`` with ``k = 2 pi / wavelength``
    and ``K = 2 pi / pump_wavelength``.
    """
    values = dict(
        pump_waist=pump_waist,
        crystal_length=crystal_length,
        pump_wavelength=pump_wavelength,
        wavelength=wavelength,
        f_prime=f_prime,
    )
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0.0):
            raise ConfigurationError(f"{name} must be a positive length, got {value!r}")
    k = 2.0 * math.pi / wavelength
    big_k = 2.0 * math.pi / pump_wavelength
    return SourceParameters(
        sigma_plus_sq=4.0 * pump_waist**2 * k / f_prime,
        sigma_minus_sq=(k / f_prime) * PHASE_MATCHING_FACTOR * crystal_length / big_k,
    )


@dataclass(frozen=True)
class PhysicalSource:
    pump_waist: float
    crystal_length: float
    pump_wavelength: float


@dataclass(frozen=True)
class OpticsSettings:
    wavelength: float = 810e-9
    f_prime: float = 0.25 / math.sqrt(2.0)
    imaging_focal: float = 0.25
    signal_angle: float | None = None
    idler_angle: float | None = None
    signal_stages: int | None = None
    idler_stages: int | None = None
    signal_system: LensSystem | None = None
    idler_system: LensSystem | None = None

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class DetectorSettings:
    slit_width: float = 100e-6
    step: float = 50e-6
    n_steps: int | None = None  # None: sized per curve to cover the distribution


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    source: SourceParameters | PhysicalSource = field(default_factory=lambda: SourceParameters(47.0, 0.006))
    optics: OpticsSettings = field(default_factory=OpticsSettings)
    detector: DetectorSettings = field(default_factory=DetectorSettings)
    seed: int = 20080101
    events: int = 1_000_000
    epsilon: float = 0.01
    n_angles: int = 91
    grid_points: int = 256
    output_dir: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.events < 1000:
            raise ConfigurationError("events must be at least 1000")
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be >= 0")
        if self.scenario == "custom":
            o = self.optics
            has_angles = o.signal_angle is not None and o.idler_angle is not None
            has_systems = o.signal_system is not None and o.idler_system is not None
            if not (has_angles or has_systems):
                raise ConfigurationError("custom scenario needs signal/idler angles or lens systems")

    def source_parameters(self) -> SourceParameters:
        if isinstance(self.source, SourceParameters):
            return self.source
        s = self.source
        return resolve_source(
            s.pump_waist, s.crystal_length, s.pump_wavelength, self.optics.wavelength, self.optics.f_prime
        )

    def replace(self, **changes) -> "ScenarioConfig":
        from dataclasses import replace

        return replace(self, **changes)

    def to_text(self) -> str:
        """Canonical text form; :func:`parse_config` of it returns an equal object."""
        cp = configparser.ConfigParser(interpolation=None)
        cp["scenario"] = {"name": self.scenario, "seed": str(self.seed), "events": str(self.events)}
        if self.output_dir is not None:
            cp["scenario"]["output_dir"] = self.output_dir
        if isinstance(self.source, SourceParameters):
            cp["source"] = {
                "sigma_plus_sq": repr(self.source.sigma_plus_sq),
                "sigma_minus_sq": repr(self.source.sigma_minus_sq),
            }
        else:
            cp["source"] = {
                "pump_waist": repr(self.source.pump_waist),
                "crystal_length": repr(self.source.crystal_length),
                "pump_wavelength": repr(self.source.pump_wavelength),
            }
        o = self.optics
        optics = {
            "wavelength": repr(o.wavelength),
            "f_prime": repr(o.f_prime),
            "imaging_focal": repr(o.imaging_focal),
        }
        for name in ("signal_angle", "idler_angle"):
            if getattr(o, name) is not None:
                optics[name] = repr(getattr(o, name))
        for name in ("signal_stages", "idler_stages"):
            if getattr(o, name) is not None:
                optics[name] = str(getattr(o, name))
        for name in ("signal_system", "idler_system"):
            if getattr(o, name) is not None:
                optics[name] = "\n" + getattr(o, name).to_text().strip()
        cp["optics"] = optics
        d = self.detector
        cp["detector"] = {
            "slit_width": repr(d.slit_width),
            "step": repr(d.step),
            "n_steps": "auto" if d.n_steps is None else str(d.n_steps),
        }
        cp["perturbation"] = {"epsilon": repr(self.epsilon)}
        cp["migration"] = {"n_angles": str(self.n_angles), "grid_points": str(self.grid_points)}
        buffer = io.StringIO()
        cp.write(buffer)
        return buffer.getvalue()


def _int(section, key, default):
    if key not in section:
        return default
    raw = section[key].strip()
    if raw.lower() == "auto":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{key} must be an integer, got {raw!r}")


def _float(section, key, default):
    if key not in section:
        return default
    try:
        return float(section[key])
    except ValueError:
        raise ConfigurationError(f"{key} must be a number, got {section[key]!r}")


def parse_config(text: str) -> ScenarioConfig:
    """Parse config text; ``;`` and ``#`` start comments, also at line ends."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    known = {"scenario", "source", "optics", "detector", "perturbation", "migration"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigurationError(f"unknown section(s): {', '.join(sorted(unknown))}")
    if "scenario" not in cp or "name" not in cp["scenario"]:
        raise ConfigurationError("config needs [scenario] with a name")
    sc = cp["scenario"]
    kwargs = {"scenario": sc["name"].strip()}
    seed = _int(sc, "seed", None)
    if seed is not None:
        kwargs["seed"] = seed
    events = _int(sc, "events", None)
    if events is not None:
        kwargs["events"] = events
    if "output_dir" in sc:
        kwargs["output_dir"] = sc["output_dir"].strip()

    try:
        if "source" in cp:
            src = cp["source"]
            direct = {"sigma_plus_sq", "sigma_minus_sq"} & set(src)
            physical = {"pump_waist", "crystal_length", "pump_wavelength"} & set(src)
            if direct and physical:
                raise ConfigurationError("give either sigma_*_sq or physical source inputs, not both")
            if direct:
                if len(direct) != 2:
                    raise ConfigurationError("both sigma_plus_sq and sigma_minus_sq are required")
                kwargs["source"] = SourceParameters(float(src["sigma_plus_sq"]), float(src["sigma_minus_sq"]))
            elif physical:
                if len(physical) != 3:
                    raise ConfigurationError("pump_waist, crystal_length and pump_wavelength are all required")
                kwargs["source"] = PhysicalSource(
                    parse_length(src["pump_waist"]),
                    parse_length(src["crystal_length"]),
                    parse_length(src["pump_wavelength"]),
                )

        if "optics" in cp:
            op = cp["optics"]
            defaults = OpticsSettings()
            okw = {
                "wavelength": parse_length(op.get("wavelength", defaults.wavelength)),
                "f_prime": parse_length(op.get("f_prime", defaults.f_prime)),
                "imaging_focal": parse_length(op.get("imaging_focal", defaults.imaging_focal)),
            }
            for name in ("signal_angle", "idler_angle"):
                if name in op:
                    okw[name] = parse_angle(op[name])
            for name in ("signal_stages", "idler_stages"):
                okw[name] = _int(op, name, None)
            for name in ("signal_system", "idler_system"):
                if name in op:
                    okw[name] = LensSystem.from_text(op[name])
            kwargs["optics"] = OpticsSettings(**okw)

        if "detector" in cp:
            dt = cp["detector"]
            defaults = DetectorSettings()
            kwargs["detector"] = DetectorSettings(
                slit_width=parse_length(dt.get("slit_width", defaults.slit_width)),
                step=parse_length(dt.get("step", defaults.step)),
                n_steps=_int(dt, "n_steps", None),
            )
        if "perturbation" in cp:
            kwargs["epsilon"] = _float(cp["perturbation"], "epsilon", 0.01)
        if "migration" in cp:
            mg = cp["migration"]
            kwargs["n_angles"] = _int(mg, "n_angles", 91) or 91
            kwargs["grid_points"] = _int(mg, "grid_points", 256) or 256
        return ScenarioConfig(**kwargs)
    except InvalidParameterError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
