"""Run-configuration file parsing.

One INI-style file with sections [system], [drive], [noise], [sweep],
[integrator], [series] describes a run.  All physical values use the
package units (angular ns^-1); temperature is given in mK and converted
with the configurable constant.  Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

from .dynamics import IntegratorConfig
from .errors import ConfigError
from .model import KB_DEFAULT, DriveParams, QubitParams, SystemParams
from .series import SeriesConfig

# flat parameter names accepted for sweep axes and linked definitions
AXIS_PARAMS = (
    "eps1", "eps2", "delta1", "delta2", "g", "amplitude", "omega", "phi0",
    "gamma1", "gamma2", "gamma_phi1", "gamma_phi2", "temperature_mk",
)

_SECTION_KEYS = {
    "system": {"delta1", "delta2", "eps1", "eps2", "g"},
    "drive": {"amplitude", "omega", "phi0"},
    "noise": {
        "gamma1", "gamma2", "gamma_phi1", "gamma_phi2",
        "gamma_excite1", "gamma_excite2", "temperature_mk", "kb_conversion",
    },
    "integrator": {
        "steps_per_period", "mode", "rel_tol", "abs_tol",
        "max_periods", "convergence_tol",
    },
    "series": {"k_max", "denom_guard"},
    "sweep": {
        "axis1", "axis2", "linked", "method", "n_time", "n_phase",
        "gammas", "samples_per_period", "extra_periods", "max_periods",
        "dump_rho", "init",
    },
}

_LINK_RE = re.compile(
    r"^\s*(\w+)\s*=\s*(?:([-+]?[0-9.eE+-]*?)\s*\*\s*)?([A-Za-z]\w*)"
    r"\s*(?:([+-])\s*([0-9.eE+-]+))?\s*$"
)


@dataclass(frozen=True)
class AxisSpec:
    name: str
    lo: float
    hi: float
    n: int


@dataclass(frozen=True)
class LinkedParam:
    """Linear link: name = coef * axis + const."""

    name: str
    coef: float
    axis: str
    const: float = 0.0

    def value(self, axis_value):
        return self.coef * axis_value + self.const


@dataclass(frozen=True)
class SweepSpec:
    axis1: AxisSpec
    axis2: AxisSpec | None = None
    linked: tuple = ()
    method: str = "both"
    n_time: int = 64
    n_phase: int = 16


@dataclass
class DynamicsSpec:
    gammas: tuple = ()
    samples_per_period: int = 8
    extra_periods: int = 2
    max_periods: int | None = None
    dump_rho: bool = False
    init: str = "gg"


@dataclass
class RunConfig:
    """Everything a CLI run needs, with the flat base values kept around
    so sweeps can override them point by point."""

    values: dict
    integrator: IntegratorConfig
    series: SeriesConfig
    sweep: SweepSpec | None = None
    dynamics: DynamicsSpec = field(default_factory=DynamicsSpec)

    def base_params(self):
        return build_system(self.values)


def build_system(values):
    """SystemParams from a flat name->value mapping."""
    kb = values.get("kb_conversion", KB_DEFAULT)
    q1 = QubitParams(
        delta=values["delta1"], eps=values["eps1"],
        gamma_relax=values.get("gamma1", 0.0),
        gamma_excite=values.get("gamma_excite1"),
        gamma_phi=values.get("gamma_phi1", 0.0),
    )
    q2 = QubitParams(
        delta=values["delta2"], eps=values["eps2"],
        gamma_relax=values.get("gamma2", 0.0),
        gamma_excite=values.get("gamma_excite2"),
        gamma_phi=values.get("gamma_phi2", 0.0),
    )
    drive = DriveParams(
        amplitude=values["amplitude"], omega=values["omega"],
        phi0=values.get("phi0", 0.0),
    )
    return SystemParams(
        qubit1=q1, qubit2=q2, g=values["g"], drive=drive,
        temperature=kb * values.get("temperature_mk", 0.0),
        kb_conversion=kb,
    )


def _get_float(cp, section, key, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            raise ConfigError("required value missing", section, key)
        return default
    raw = cp.get(section, key)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"not a number: {raw!r}", section, key) from None


def _get_int(cp, section, key, default=None):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    if raw.strip().lower() == "auto":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"not an integer: {raw!r}", section, key) from None


def _parse_axis(raw, section="sweep", key="axis1"):
    parts = raw.split()
    if len(parts) != 4:
        raise ConfigError(
            f"expected 'name lo hi npoints', got {raw!r}", section, key)
    name, lo, hi, n = parts
    if name not in AXIS_PARAMS:
        raise ConfigError(f"unknown sweep parameter {name!r}", section, key)
    try:
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"bad axis numbers in {raw!r}", section, key) from None
    if n < 2:
        raise ConfigError("axis needs at least 2 points", section, key)
    return AxisSpec(name, lo, hi, n)


def _parse_linked(raw, axes):
    links = []
    for piece in raw.split(";"):
        piece = piece.strip()
        if not piece:
            continue
        m = _LINK_RE.match(piece)
        if not m:
            raise ConfigError(f"cannot parse linked expression {piece!r}",
                              "sweep", "linked")
        name, coef, axis, sign, const = m.groups()
        if name not in AXIS_PARAMS:
            raise ConfigError(f"unknown linked parameter {name!r}", "sweep", "linked")
        if axis not in axes:
            raise ConfigError(
                f"linked parameter {name!r} refers to {axis!r}, which is not a swept axis",
                "sweep", "linked")
        coef = float(coef) if coef else 1.0
        const = float(const) if const else 0.0
        if sign == "-":
            const = -const
        links.append(LinkedParam(name=name, coef=coef, axis=axis, const=const))
    return tuple(links)


def load_config(path):
    """Parse and validate a run-configuration file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    for section in cp.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _SECTION_KEYS[section]
        for key in cp.options(section):
            if key not in allowed:
                raise ConfigError("unknown key", section, key)
    for required in ("system", "drive"):
        if not cp.has_section(required):
            raise ConfigError(f"missing required section [{required}]")

    values = {}
    for key in ("delta1", "delta2", "eps1", "eps2", "g"):
        values[key] = _get_float(cp, "system", key, required=True)
    values["amplitude"] = _get_float(cp, "drive", "amplitude", required=True)
    values["omega"] = _get_float(cp, "drive", "omega", required=True)
    values["phi0"] = _get_float(cp, "drive", "phi0", 0.0)
    if cp.has_section("noise"):
        for key in ("gamma1", "gamma2", "gamma_phi1", "gamma_phi2"):
            values[key] = _get_float(cp, "noise", key, 0.0)
        values["temperature_mk"] = _get_float(cp, "noise", "temperature_mk", 0.0)
        values["kb_conversion"] = _get_float(cp, "noise", "kb_conversion", KB_DEFAULT)
        for key in ("gamma_excite1", "gamma_excite2"):
            v = _get_float(cp, "noise", key)
            if v is not None:
                values[key] = v

    integrator = IntegratorConfig(
        steps_per_period=_get_int(cp, "integrator", "steps_per_period"),
        mode=cp.get("integrator", "mode", fallback="fixed"),
        rel_tol=_get_float(cp, "integrator", "rel_tol", 1e-9),
        abs_tol=_get_float(cp, "integrator", "abs_tol", 1e-11),
        max_periods=_get_int(cp, "integrator", "max_periods", 200_000) or 200_000,
        convergence_tol=_get_float(cp, "integrator", "convergence_tol", 1e-9),
    )
    series = SeriesConfig(
        k_max=_get_int(cp, "series", "k_max"),
        denom_guard=_get_float(cp, "series", "denom_guard"),
    )
    # fail early on an under-truncated series
    series.resolve(build_system(values))

    sweep = None
    dynamics = DynamicsSpec()
    if cp.has_section("sweep"):
        axes = []
        axis1 = axis2 = None
        if cp.has_option("sweep", "axis1"):
            axis1 = _parse_axis(cp.get("sweep", "axis1"), key="axis1")
            axes.append(axis1.name)
        if cp.has_option("sweep", "axis2"):
            if axis1 is None:
                raise ConfigError("axis2 given without axis1", "sweep", "axis2")
            axis2 = _parse_axis(cp.get("sweep", "axis2"), key="axis2")
            axes.append(axis2.name)
        linked = ()
        if cp.has_option("sweep", "linked"):
            linked = _parse_linked(cp.get("sweep", "linked"), axes)
        method = cp.get("sweep", "method", fallback="both").strip()
        if method not in ("numeric", "analytic", "both"):
            raise ConfigError(f"unknown method {method!r}", "sweep", "method")
        n_time = _get_int(cp, "sweep", "n_time", 64)
        n_phase = _get_int(cp, "sweep", "n_phase", 16)
        if axis1 is not None:
            sweep = SweepSpec(axis1=axis1, axis2=axis2, linked=linked,
                              method=method, n_time=n_time, n_phase=n_phase)
        gammas = ()
        if cp.has_option("sweep", "gammas"):
            try:
                gammas = tuple(float(x) for x in cp.get("sweep", "gammas").split())
            except ValueError:
                raise ConfigError("bad gammas list", "sweep", "gammas") from None
        init = cp.get("sweep", "init", fallback="gg").strip()
        if init not in ("gg", "ge", "eg", "ee", "mixed"):
            raise ConfigError(f"unknown initial state {init!r}", "sweep", "init")
        dynamics = DynamicsSpec(
            gammas=gammas,
            samples_per_period=_get_int(cp, "sweep", "samples_per_period", 8),
            extra_periods=_get_int(cp, "sweep", "extra_periods", 2),
            max_periods=_get_int(cp, "sweep", "max_periods"),
            dump_rho=cp.getboolean("sweep", "dump_rho", fallback=False),
            init=init,
        )

    return RunConfig(values=values, integrator=integrator, series=series,
                     sweep=sweep, dynamics=dynamics)
