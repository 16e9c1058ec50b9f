"""
Run configuration for single points and separation sweeps
JSON file values override environment defaults, which override built-in defaults.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from dotenv import load_dotenv

from errors import ConfigError
from geometry import SphereGeometry, TruncationPlan

load_dotenv()

PRESCRIPTIONS = ("drude", "plasma", "pc")
BOUNDARIES = ("grounded", "isolated")
CLASSICAL_MODES = ("auto", "exact", "pc_substitute")
OUTPUT_FORMATS = ("csv", "json")

TOP_LEVEL_KEYS = {
    "R1_um", "R2_um", "gap_um", "sweep", "temperature_K", "prescription", "boundary",
    "omega_p_eV", "gamma_eV", "truncation", "decimation", "tolerances", "output",
    "classical_mode", "workers",
}
SWEEP_KEYS = {"start_um", "stop_um", "points", "log"}
TRUNCATION_KEYS = {"l_factor", "m_factor", "strip_factor", "l_max_bispherical", "m_tolerance"}
TOLERANCE_KEYS = {"quad_rel_tol"}
OUTPUT_KEYS = {"format", "path"}


def env_defaults() -> Dict[str, Any]:
    """Defaults taken from the environment (.env supported)"""
    return {
        "temperature_K": float(os.getenv("CASIMIR_TEMPERATURE_K", "300")),
        "omega_p_eV": float(os.getenv("CASIMIR_OMEGA_P_EV", "9.0")),
        "gamma_eV": float(os.getenv("CASIMIR_GAMMA_EV", "0.035")),
        "workers": int(os.getenv("CASIMIR_WORKERS", "1")),
        "output_dir": os.getenv("CASIMIR_OUTPUT_DIR", "results"),
    }


@dataclass
class SweepSpec:
    start_um: float
    stop_um: float
    points: int
    log: bool = True

    def separations(self) -> List[float]:
        if self.points == 1:
            return [self.start_um]
        if self.log:
            grid = np.geomspace(self.start_um, self.stop_um, self.points)
        else:
            grid = np.linspace(self.start_um, self.stop_um, self.points)
        return [float(a) for a in grid]


@dataclass
class RunConfig:
    """Everything needed to reproduce a run"""
    R1_um: float
    R2_um: float
    gap_um: Optional[float] = None
    sweep: Optional[SweepSpec] = None
    temperature_K: float = 300.0
    prescription: str = "drude"
    boundary: str = "grounded"
    omega_p_eV: Tuple[float, float] = (9.0, 9.0)
    gamma_eV: float = 0.035
    truncation: Dict[str, float] = field(default_factory=dict)
    decimation: Union[str, None, Tuple[int, int]] = "auto"
    quad_rel_tol: float = 1e-8
    classical_mode: str = "auto"
    output_format: str = "csv"
    output_path: Optional[str] = None
    workers: int = 1

    def separations(self) -> List[float]:
        if self.sweep is not None:
            return self.sweep.separations()
        return [self.gap_um]

    def geometry(self, a: float) -> SphereGeometry:
        return SphereGeometry(self.R1_um, self.R2_um, a)

    def plan_for(self, geom: SphereGeometry) -> TruncationPlan:
        return TruncationPlan.for_geometry(geom, decimation=self.decimation, **self.truncation)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "R1_um": self.R1_um,
            "R2_um": "inf" if math.isinf(self.R2_um) else self.R2_um,
            "temperature_K": self.temperature_K,
            "prescription": self.prescription,
            "boundary": self.boundary,
            "omega_p_eV": list(self.omega_p_eV),
            "gamma_eV": self.gamma_eV,
            "truncation": dict(self.truncation),
            "decimation": (self.decimation if isinstance(self.decimation, str) or self.decimation is None
                           else {"p1": self.decimation[0], "p2": self.decimation[1]}),
            "tolerances": {"quad_rel_tol": self.quad_rel_tol},
            "classical_mode": self.classical_mode,
            "output": {"format": self.output_format, "path": self.output_path},
            "workers": self.workers,
        }
        if self.sweep is not None:
            data["sweep"] = asdict(self.sweep)
        else:
            data["gap_um"] = self.gap_um
        return data


def _check_keys(section: Dict[str, Any], allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)}", where)


def _positive(value: Any, key: str, allow_inf: bool = False) -> float:
    if isinstance(value, str) and allow_inf and value.lower() in ("inf", "plate"):
        return math.inf
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", key)
    if not number > 0 or (math.isinf(number) and not allow_inf):
        raise ConfigError(f"must be positive and finite, got {value!r}", key)
    return number


def _choice(value: Any, choices: Tuple[str, ...], key: str) -> str:
    text = str(value).lower()
    if text not in choices:
        raise ConfigError(f"must be one of {choices}, got {value!r}", key)
    return text


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """Validate a configuration mapping"""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys(data, TOP_LEVEL_KEYS, "config")
    env = env_defaults()

    if "R1_um" not in data or "R2_um" not in data:
        raise ConfigError("R1_um and R2_um are required")
    R1 = _positive(data["R1_um"], "R1_um")
    R2 = _positive(data["R2_um"], "R2_um", allow_inf=True)

    sweep = None
    gap = None
    if "sweep" in data:
        spec = data["sweep"]
        if not isinstance(spec, dict):
            raise ConfigError("must be an object", "sweep")
        _check_keys(spec, SWEEP_KEYS, "sweep")
        points = int(spec.get("points", 20))
        if points < 1:
            raise ConfigError(f"must be >= 1, got {points}", "sweep.points")
        sweep = SweepSpec(start_um=_positive(spec.get("start_um"), "sweep.start_um"),
                          stop_um=_positive(spec.get("stop_um"), "sweep.stop_um"),
                          points=points, log=bool(spec.get("log", True)))
    elif "gap_um" in data:
        gap = _positive(data["gap_um"], "gap_um")
    else:
        raise ConfigError("either gap_um or sweep is required")

    omega = data.get("omega_p_eV", env["omega_p_eV"])
    if isinstance(omega, (list, tuple)):
        if len(omega) != 2:
            raise ConfigError("give one value or one per sphere", "omega_p_eV")
        omega_pair = (_positive(omega[0], "omega_p_eV"), _positive(omega[1], "omega_p_eV"))
    else:
        value = _positive(omega, "omega_p_eV")
        omega_pair = (value, value)

    prescription = _choice(data.get("prescription", "drude"), PRESCRIPTIONS, "prescription")
    gamma = float(data.get("gamma_eV", env["gamma_eV"]))
    if prescription == "drude" and not gamma > 0:
        raise ConfigError(f"Drude prescription needs gamma > 0, got {gamma}", "gamma_eV")

    truncation = data.get("truncation", {}) or {}
    _check_keys(truncation, TRUNCATION_KEYS, "truncation")

    decimation = data.get("decimation", "auto")
    if isinstance(decimation, dict):
        _check_keys(decimation, {"p1", "p2"}, "decimation")
        try:
            decimation = (int(decimation["p1"]), int(decimation["p2"]))
        except (KeyError, ValueError, TypeError):
            raise ConfigError("needs integer p1 and p2", "decimation")
        if min(decimation) < 1:
            raise ConfigError("block sizes must be >= 1", "decimation")
    elif decimation in ("off", "none", None, False):
        decimation = None
    elif decimation != "auto":
        raise ConfigError(f"must be 'auto', 'off' or {{p1, p2}}, got {decimation!r}", "decimation")

    tolerances = data.get("tolerances", {}) or {}
    _check_keys(tolerances, TOLERANCE_KEYS, "tolerances")
    quad_rel_tol = float(tolerances.get("quad_rel_tol", 1e-8))
    if not 0 < quad_rel_tol < 1:
        raise ConfigError(f"must lie in (0, 1), got {quad_rel_tol}", "tolerances.quad_rel_tol")

    output = data.get("output", {}) or {}
    _check_keys(output, OUTPUT_KEYS, "output")

    workers = int(data.get("workers", env["workers"]))
    if workers < 1:
        raise ConfigError(f"must be >= 1, got {workers}", "workers")

    return RunConfig(
        R1_um=R1, R2_um=R2, gap_um=gap, sweep=sweep,
        temperature_K=_positive(data.get("temperature_K", env["temperature_K"]), "temperature_K"),
        prescription=prescription,
        boundary=_choice(data.get("boundary", "grounded"), BOUNDARIES, "boundary"),
        omega_p_eV=omega_pair, gamma_eV=gamma, truncation=dict(truncation),
        decimation=decimation, quad_rel_tol=quad_rel_tol,
        classical_mode=_choice(data.get("classical_mode", "auto"), CLASSICAL_MODES, "classical_mode"),
        output_format=_choice(output.get("format", "csv"), OUTPUT_FORMATS, "output.format"),
        output_path=output.get("path"),
        workers=workers,
    )


def read_config_dict(path: Union[str, Path]) -> Dict[str, Any]:
    """Raw JSON mapping of a configuration file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}")
    return data


def load_config(path: Union[str, Path]) -> RunConfig:
    """Load and validate a JSON run configuration"""
    return config_from_dict(read_config_dict(path))


def save_config(config: RunConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, ensure_ascii=False, indent=2)
    return path


def default_output_path(config: RunConfig) -> Path:
    """Output file under CASIMIR_OUTPUT_DIR unless the config names one"""
    if config.output_path:
        return Path(config.output_path)
    name = f"{config.prescription}_{config.boundary}_R{config.R1_um:g}_{config.R2_um:g}.{config.output_format}"
    return Path(env_defaults()["output_dir"]) / name
