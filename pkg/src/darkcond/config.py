"""Declarative JSON run configuration.

Every physical quantity carries a unit-suffixed field name (tau0_ps, V0-style
depth_meV, n_e_per_cm2, ...) so unit mistakes fail loudly at parse time.
Parsing is strict: unknown keys and malformed values raise ConfigError with
the offending field path. A parsed config re-emits to an equivalent document
(parse -> emit -> parse is the identity on the dataclass).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .occupancy import OccupancySpec
from .structure import Well


class ConfigError(ValueError):
    """Invalid run configuration; message starts with the field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


def _expect_mapping(value, path):
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _take(d, key, path, default=..., kind=None):
    if key not in d:
        if default is ...:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
        return default
    value = d.pop(key)
    if kind is not None and not isinstance(value, kind):
        names = kind.__name__ if not isinstance(kind, tuple) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"{path}.{key}" if path else key,
                          f"expected {names}, got {type(value).__name__}")
    return value


def _number(d, key, path, default=..., positive=False, nonnegative=False):
    value = _take(d, key, path, default, kind=(int, float))
    if isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "expected a number, got a boolean")
    value = float(value)
    where = f"{path}.{key}" if path else key
    if positive and not value > 0:
        raise ConfigError(where, f"must be positive, got {value}")
    if nonnegative and value < 0:
        raise ConfigError(where, f"must be >= 0, got {value}")
    if value != value or value in (float("inf"), float("-inf")):
        if key != "tau_p_ps":  # an infinite photon transport time is meaningful
            raise ConfigError(where, "must be finite")
    return value


def _integer(d, key, path, default=..., minimum=None):
    value = _take(d, key, path, default, kind=int)
    if isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "expected an integer, got a boolean")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}, got {value}")
    return int(value)


def _reject_unknown(d, path):
    if d:
        key = sorted(d)[0]
        raise ConfigError(f"{path}.{key}" if path else key, "unknown field")


@dataclass(frozen=True)
class StructureSpec:
    length: float              # L_c, nm
    m_star: float
    eps_r: float
    barrier: float             # meV
    wells: tuple[Well, ...]

    def to_dict(self):
        return {
            "L_c_nm": self.length,
            "m_star": self.m_star,
            "eps_r": self.eps_r,
            "barrier_meV": self.barrier,
            "wells": [
                {"center_nm": w.center, "width_nm": w.width, "depth_meV": w.depth}
                for w in self.wells
            ],
        }


def _parse_structure(raw, path="structure"):
    d = dict(_expect_mapping(raw, path))
    length = _number(d, "L_c_nm", path, positive=True)
    m_star = _number(d, "m_star", path, positive=True)
    eps_r = _number(d, "eps_r", path, 13.0, positive=True)
    barrier = _number(d, "barrier_meV", path, nonnegative=True)
    wells_raw = _take(d, "wells", path, [], kind=list)
    wells = []
    for i, w in enumerate(wells_raw):
        wp = f"{path}.wells[{i}]"
        wd = dict(_expect_mapping(w, wp))
        wells.append(Well(
            center=_number(wd, "center_nm", wp),
            width=_number(wd, "width_nm", wp, positive=True),
            depth=_number(wd, "depth_meV", wp, positive=True),
        ))
        _reject_unknown(wd, wp)
    _reject_unknown(d, path)
    return StructureSpec(length=length, m_star=m_star, eps_r=eps_r,
                         barrier=barrier, wells=tuple(wells))


@dataclass(frozen=True)
class OccupancyConfig:
    mode: str                    # "pinned" | "density"
    j_pin: int | None
    n_e_per_cm2: float | None
    surface: float
    spin_degeneracy: float

    def to_spec(self) -> OccupancySpec:
        if self.mode == "pinned":
            return OccupancySpec.pinned(self.j_pin, surface=self.surface,
                                        spin_degeneracy=self.spin_degeneracy)
        return OccupancySpec.density(self.n_e_per_cm2, surface=self.surface,
                                     spin_degeneracy=self.spin_degeneracy)

    def to_dict(self):
        out = {"mode": self.mode, "surface_nm2": self.surface,
               "spin_degeneracy": self.spin_degeneracy}
        if self.mode == "pinned":
            out["j_pin"] = self.j_pin
        else:
            out["n_e_per_cm2"] = self.n_e_per_cm2
        return out


def _parse_occupancy(raw, path="occupancy"):
    d = dict(_expect_mapping(raw, path))
    mode = _take(d, "mode", path, kind=str)
    if mode not in ("pinned", "density"):
        raise ConfigError(f"{path}.mode", f"expected 'pinned' or 'density', got {mode!r}")
    surface = _number(d, "surface_nm2", path, 1.0e6, positive=True)
    spin = _number(d, "spin_degeneracy", path, 1.0, positive=True)
    j_pin = None
    n_e = None
    if mode == "pinned":
        j_pin = _integer(d, "j_pin", path, minimum=2)
    else:
        n_e = _number(d, "n_e_per_cm2", path, positive=True)
    _reject_unknown(d, path)
    return OccupancyConfig(mode=mode, j_pin=j_pin, n_e_per_cm2=n_e,
                           surface=surface, spin_degeneracy=spin)


@dataclass(frozen=True)
class SweepAxis:
    """One sweep dimension: explicit values or a range with a point count."""

    variable: str                       # omega_c | tau0 | n_qw | n_subbands
    values: tuple[float, ...] | None = None
    start: float | None = None
    stop: float | None = None
    count: int | None = None
    scale: str = "linear"               # linear | log
    unit: str = "w21"                   # omega_c only: w21 | meV

    def points(self):
        import numpy as np
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def to_dict(self):
        out = {"variable": self.variable, "scale": self.scale}
        if self.values is not None:
            out["values"] = list(self.values)
        else:
            out.update(start=self.start, stop=self.stop, count=self.count)
        if self.variable == "omega_c":
            out["unit"] = self.unit
        return out


_SWEEP_VARIABLES = ("omega_c", "tau0", "n_qw", "n_subbands")


def _parse_axis(raw, path):
    d = dict(_expect_mapping(raw, path))
    variable = _take(d, "variable", path, kind=str)
    if variable not in _SWEEP_VARIABLES:
        raise ConfigError(f"{path}.variable",
                          f"expected one of {_SWEEP_VARIABLES}, got {variable!r}")
    scale = _take(d, "scale", path, "linear", kind=str)
    if scale not in ("linear", "log"):
        raise ConfigError(f"{path}.scale", f"expected 'linear' or 'log', got {scale!r}")
    unit = _take(d, "unit", path, "w21", kind=str)
    if unit not in ("w21", "meV"):
        raise ConfigError(f"{path}.unit", f"expected 'w21' or 'meV', got {unit!r}")

    integer_valued = variable in ("n_qw", "n_subbands")
    if "values" in d:
        values_raw = _take(d, "values", path, kind=list)
        if not values_raw:
            raise ConfigError(f"{path}.values", "must be non-empty")
        values = []
        for i, v in enumerate(values_raw):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}.values[{i}]", "expected a number")
            if not (float(v) > 0 and float(v) == float(v)):
                raise ConfigError(f"{path}.values[{i}]",
                                  f"must be positive and finite, got {v}")
            if integer_valued and int(v) != v:
                raise ConfigError(f"{path}.values[{i}]", f"must be an integer, got {v}")
            values.append(float(v))
        _reject_unknown(d, path)
        return SweepAxis(variable=variable, values=tuple(values), scale=scale, unit=unit)

    start = _number(d, "start", path, positive=True)
    stop = _number(d, "stop", path, positive=True)
    count = _integer(d, "count", path, minimum=2)
    _reject_unknown(d, path)
    return SweepAxis(variable=variable, start=start, stop=stop, count=count,
                     scale=scale, unit=unit)


@dataclass(frozen=True)
class FixedOmega:
    value: float
    unit: str = "w21"

    def to_dict(self):
        return {"value": self.value, "unit": self.unit}


@dataclass(frozen=True)
class MultiwellSpec:
    pitch: float = 20.0     # nm
    width: float = 5.0      # nm
    depth: float = 100.0    # meV

    def to_dict(self):
        return {"pitch_nm": self.pitch, "width_nm": self.width, "depth_meV": self.depth}


@dataclass(frozen=True)
class SweepConfig:
    """Full declarative run description (one JSON document)."""

    structure: StructureSpec
    occupancy: OccupancyConfig
    tau0: float                       # ps
    tau_p: float                      # ps
    n_subbands: int
    n_points: int
    sweep: SweepAxis
    omega_c_axis: SweepAxis | None = None     # inner cavity axis for tau0/n_qw sweeps
    omega_c: FixedOmega | None = None         # fixed point for convergence runs
    multiwell: MultiwellSpec = field(default_factory=MultiwellSpec)
    dominant_transition: tuple[int, int] | None = None   # None = auto
    eps_N: float = 1.0e-9
    decoupled: bool = False
    outputs: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "structure": self.structure.to_dict(),
            "occupancy": self.occupancy.to_dict(),
            "tau0_ps": self.tau0,
            "tau_p_ps": self.tau_p,
            "n_subbands": self.n_subbands,
            "n_points": self.n_points,
            "sweep": self.sweep.to_dict(),
            "multiwell": self.multiwell.to_dict(),
            "dominant_transition": ("auto" if self.dominant_transition is None
                                    else list(self.dominant_transition)),
            "eps_N": self.eps_N,
            "decoupled": self.decoupled,
            "outputs": dict(self.outputs),
        }
        if self.omega_c_axis is not None:
            out["omega_c_axis"] = self.omega_c_axis.to_dict()
        if self.omega_c is not None:
            out["omega_c"] = self.omega_c.to_dict()
        return out

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


def parse_config(raw: dict) -> SweepConfig:
    d = dict(_expect_mapping(raw, "config"))
    structure = _parse_structure(_take(d, "structure", ""))
    occupancy = _parse_occupancy(_take(d, "occupancy", ""))
    tau0 = _number(d, "tau0_ps", "", positive=True)
    tau_p = _number(d, "tau_p_ps", "", 1.0e6, positive=True)
    n_subbands = _integer(d, "n_subbands", "", 40, minimum=2)
    n_points = _integer(d, "n_points", "", 1024, minimum=64)
    if n_subbands > n_points:
        raise ConfigError("n_subbands", f"must be <= n_points={n_points}, got {n_subbands}")
    sweep = _parse_axis(_take(d, "sweep", ""), "sweep")

    omega_c_axis = None
    if "omega_c_axis" in d:
        omega_c_axis = _parse_axis(_take(d, "omega_c_axis", ""), "omega_c_axis")
        if omega_c_axis.variable != "omega_c":
            raise ConfigError("omega_c_axis.variable", "must be 'omega_c'")

    omega_c = None
    if "omega_c" in d:
        od = dict(_expect_mapping(_take(d, "omega_c", ""), "omega_c"))
        value = _number(od, "value", "omega_c", positive=True)
        unit = _take(od, "unit", "omega_c", "w21", kind=str)
        if unit not in ("w21", "meV"):
            raise ConfigError("omega_c.unit", f"expected 'w21' or 'meV', got {unit!r}")
        _reject_unknown(od, "omega_c")
        omega_c = FixedOmega(value=value, unit=unit)

    multiwell = MultiwellSpec()
    if "multiwell" in d:
        md = dict(_expect_mapping(_take(d, "multiwell", ""), "multiwell"))
        multiwell = MultiwellSpec(
            pitch=_number(md, "pitch_nm", "multiwell", 20.0, positive=True),
            width=_number(md, "width_nm", "multiwell", 5.0, positive=True),
            depth=_number(md, "depth_meV", "multiwell", 100.0, positive=True),
        )
        _reject_unknown(md, "multiwell")

    dominant = _take(d, "dominant_transition", "", "auto")
    if dominant == "auto":
        dominant_transition = None
    elif (isinstance(dominant, list) and len(dominant) == 2
          and all(isinstance(v, int) and not isinstance(v, bool) for v in dominant)):
        dominant_transition = (dominant[0], dominant[1])
        if dominant_transition[0] <= dominant_transition[1]:
            raise ConfigError("dominant_transition", "needs l > j")
    else:
        raise ConfigError("dominant_transition", f"expected 'auto' or [l, j], got {dominant!r}")

    eps_N = _number(d, "eps_N", "", 1.0e-9, nonnegative=True)
    decoupled = _take(d, "decoupled", "", False, kind=bool)
    outputs = dict(_take(d, "outputs", "", {}, kind=dict))
    for key, value in outputs.items():
        if not isinstance(value, str):
            raise ConfigError(f"outputs.{key}", "expected a path string")
    _reject_unknown(d, "")

    return SweepConfig(
        structure=structure, occupancy=occupancy, tau0=tau0, tau_p=tau_p,
        n_subbands=n_subbands, n_points=n_points, sweep=sweep,
        omega_c_axis=omega_c_axis, omega_c=omega_c, multiwell=multiwell,
        dominant_transition=dominant_transition, eps_N=eps_N,
        decoupled=decoupled, outputs=outputs,
    )


def load_config(path) -> SweepConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
    return parse_config(raw)
