"""
Deviation from the proximity force approximation for two metallic spheres
Combines the classical (n = 0) term with the positive Matsubara modes and
runs separation sweeps.
"""

from __future__ import annotations

import asyncio
import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from scipy import constants

from bispherical_zero import (ClassicalResult, bispherical_from_spheres, pc_classical,
                              tm_classical)
from config import RunConfig
from de_positive import beta_positive
from errors import IdentityError
from geometry import SphereGeometry, TruncationPlan
from lifshitz_pp import POSITIVE_ONLY, ZERO_ONLY, planar_quantities
from materials import FORCE_TO_SI, GRADIENT_TO_SI, HBAR_C, PermittivityModel
from plasma_zero import plasma_classical_total, resolve_plasma_mode

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-10

CSV_COLUMNS = (
    "a_um", "F_pfa_N", "F_N", "beta", "Fp_pfa_N_per_m", "Fp_N_per_m", "beta_tilde",
    "w", "w_tilde", "F_n0_N", "F_npos_N", "beta_n0", "beta_npos",
    "beta_tilde_n0", "beta_tilde_npos", "error",
)


@dataclass(frozen=True)
class ModelSpec:
    """Material prescription, TM boundary condition and permittivity parameters (eV)"""
    prescription: str = "drude"
    boundary: str = "grounded"
    omega_p: Tuple[float, float] = (9.0, 9.0)
    gamma: float = 0.035
    temperature: float = 300.0

    def __post_init__(self):
        if self.prescription not in ("drude", "plasma", "pc"):
            raise ValueError(f"unknown prescription '{self.prescription}'")
        if self.boundary not in ("grounded", "isolated"):
            raise ValueError(f"unknown boundary '{self.boundary}'")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if not isinstance(self.omega_p, tuple):
            object.__setattr__(self, "omega_p", (float(self.omega_p), float(self.omega_p)))
        if self.prescription == "drude" and not self.gamma > 0:
            raise ValueError("Drude prescription requires gamma > 0")

    def materials(self) -> Tuple[PermittivityModel, PermittivityModel]:
        if self.prescription == "pc":
            pc = PermittivityModel.perfect_conductor()
            return pc, pc
        if self.prescription == "plasma":
            return tuple(PermittivityModel.plasma(w) for w in self.omega_p)
        return tuple(PermittivityModel.drude(w, self.gamma) for w in self.omega_p)

    @property
    def table_prescription(self) -> str:
        """Which derivative-expansion table serves the n>0 modes"""
        return "drude" if self.prescription == "drude" else "plasma"


@dataclass
class DeviationResult:
    """Forces in eV/um, gradients in eV/um^2"""
    a: float
    F_pfa: float
    F: float
    beta: float
    Fp_pfa: float
    Fp: float
    beta_tilde: float
    w: float
    w_tilde: float
    F_n0: float
    F_npos: float
    Fp_n0: float
    Fp_npos: float
    beta_n0: float
    beta_npos: float
    beta_tilde_n0: float
    beta_tilde_npos: float
    normalized_force: float
    normalized_gradient: float
    classical_mode: str = "exact"

    def to_row(self) -> Dict[str, Any]:
        """CSV row in SI units"""
        return {
            "a_um": self.a,
            "F_pfa_N": self.F_pfa * FORCE_TO_SI,
            "F_N": self.F * FORCE_TO_SI,
            "beta": self.beta,
            "Fp_pfa_N_per_m": self.Fp_pfa * GRADIENT_TO_SI,
            "Fp_N_per_m": self.Fp * GRADIENT_TO_SI,
            "beta_tilde": self.beta_tilde,
            "w": self.w,
            "w_tilde": self.w_tilde,
            "F_n0_N": self.F_n0 * FORCE_TO_SI,
            "F_npos_N": self.F_npos * FORCE_TO_SI,
            "beta_n0": self.beta_n0,
            "beta_npos": self.beta_npos,
            "beta_tilde_n0": self.beta_tilde_n0,
            "beta_tilde_npos": self.beta_tilde_npos,
            "error": "",
        }


@dataclass
class SweepRow:
    a: float
    result: Optional[DeviationResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_row(self) -> Dict[str, Any]:
        if self.result is not None:
            return self.result.to_row()
        row = {column: "" for column in CSV_COLUMNS}
        row["a_um"] = self.a
        row["error"] = self.error
        return row


def ideal_pfa_norms(geom: SphereGeometry) -> Tuple[float, float]:
    """Zero-temperature ideal-metal PFA force (eV/um) and gradient (eV/um^2)"""
    if geom.a <= 0:
        raise ValueError("separation must be positive")
    force = -math.pi ** 3 * HBAR_C * geom.reduced_radius / (360 * geom.a ** 3)
    gradient = math.pi ** 3 * HBAR_C * geom.reduced_radius / (120 * geom.a ** 4)
    return force, gradient


def _pfa_parts(a: float, model: ModelSpec, rel_tol: float) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """((F^pp_0, P^pp_0), (F^pp_+, P^pp_+)) for the model's materials"""
    m1, m2 = model.materials()
    zero = planar_quantities(a, model.temperature, m1, m2, ZERO_ONLY, rel_tol)
    positive = planar_quantities(a, model.temperature, m1, m2, POSITIVE_ONLY, rel_tol)
    return ((zero.free_energy_per_area, zero.pressure),
            (positive.free_energy_per_area, positive.pressure))


def weights(a: float, model: ModelSpec, rel_tol: float = 1e-8) -> Tuple[float, float]:
    """(w, w_tilde): classical share of the PFA force and gradient"""
    if a <= 0:
        raise ValueError(f"separation must be positive, got {a}")
    (f0, p0), (fp, pp) = _pfa_parts(a, model, rel_tol)
    return f0 / (f0 + fp), p0 / (p0 + pp)


def classical_term(geom: SphereGeometry, model: ModelSpec, plan: TruncationPlan,
                   mode: str = "auto", workers: int = 1) -> Tuple[ClassicalResult, str]:
    """Zero-frequency force and gradient plus the label of how it was obtained"""
    bg = bispherical_from_spheres(geom)
    if model.prescription == "drude":
        return tm_classical(bg, model.temperature, model.boundary, plan.l_max_bispherical), "exact"
    if model.prescription == "pc":
        return pc_classical(bg, model.temperature, model.boundary, plan.l_max_bispherical), "exact"

    if geom.is_sphere_plate and mode != "pc_substitute":
        logger.warning("sphere-plate plasma TE term is taken from the perfect conductor")
        mode = "pc_substitute"
    resolved = resolve_plasma_mode(plan, mode)
    if resolved == "pc_substitute":
        return pc_classical(bg, model.temperature, model.boundary, plan.l_max_bispherical), resolved
    total = plasma_classical_total(geom, model.temperature, model.omega_p, model.boundary,
                                   plan, mode="exact", workers=workers)
    return total, resolved


def deviation(geom: SphereGeometry, model: ModelSpec, plan: Optional[TruncationPlan] = None,
              classical_mode: str = "auto", rel_tol: float = 1e-8,
              workers: int = 1) -> DeviationResult:
    """Full force, gradient and their PFA deviations at one separation"""
    plan = plan or TruncationPlan.for_geometry(geom)
    a, x = geom.a, geom.x
    two_pi_r = 2 * math.pi * geom.reduced_radius

    (f0_pp, p0_pp), (fpos_pp, ppos_pp) = _pfa_parts(a, model, rel_tol)
    F_pfa_0, F_pfa_pos = two_pi_r * f0_pp, two_pi_r * fpos_pp
    Fp_pfa_0, Fp_pfa_pos = -two_pi_r * p0_pp, -two_pi_r * ppos_pp
    F_pfa, Fp_pfa = F_pfa_0 + F_pfa_pos, Fp_pfa_0 + Fp_pfa_pos

    if model.prescription == "pc":
        logger.warning("perfect-conductor n>0 modes use the plasma derivative-expansion table")
    beta_npos, beta_tilde_npos = beta_positive(a, geom.u, model.table_prescription)
    if x > 0.1:
        logger.warning(f"a/R = {x:.3f} exceeds 0.1; derivative expansion may be inaccurate")
    F_npos = F_pfa_pos * (1 + beta_npos * x)
    Fp_npos = Fp_pfa_pos * (1 + beta_tilde_npos * x)

    classical, mode = classical_term(geom, model, plan, classical_mode, workers)
    if mode == "pc_substitute":
        # keep the ideal-metal deviation, rescaled to the plasma PFA
        pc = PermittivityModel.perfect_conductor()
        pc_pp = planar_quantities(a, model.temperature, pc, pc, ZERO_ONLY, rel_tol)
        beta_n0 = (classical.force / (two_pi_r * pc_pp.free_energy_per_area) - 1) / x
        beta_tilde_n0 = (classical.gradient / (-two_pi_r * pc_pp.pressure) - 1) / x
        F_n0 = F_pfa_0 * (1 + beta_n0 * x)
        Fp_n0 = Fp_pfa_0 * (1 + beta_tilde_n0 * x)
    else:
        F_n0, Fp_n0 = classical.force, classical.gradient
        beta_n0 = (F_n0 / F_pfa_0 - 1) / x
        beta_tilde_n0 = (Fp_n0 / Fp_pfa_0 - 1) / x

    F, Fp = F_n0 + F_npos, Fp_n0 + Fp_npos
    beta = (F / F_pfa - 1) / x
    beta_tilde = (Fp / Fp_pfa - 1) / x
    w, w_tilde = F_pfa_0 / F_pfa, Fp_pfa_0 / Fp_pfa

    for name, full, split in (("beta", beta, w * beta_n0 + (1 - w) * beta_npos),
                              ("beta_tilde", beta_tilde,
                               w_tilde * beta_tilde_n0 + (1 - w_tilde) * beta_tilde_npos)):
        if abs(full - split) > IDENTITY_TOLERANCE * max(1.0, abs(full)):
            raise IdentityError(f"{name}={full} but weighted split gives {split} at a={a} um")

    F_id, Fp_id = ideal_pfa_norms(geom)
    logger.debug(f"a={a} um: beta={beta:.4f}, beta_tilde={beta_tilde:.4f}, w={w:.4f}")
    return DeviationResult(
        a=a, F_pfa=F_pfa, F=F, beta=beta, Fp_pfa=Fp_pfa, Fp=Fp, beta_tilde=beta_tilde,
        w=w, w_tilde=w_tilde, F_n0=F_n0, F_npos=F_npos, Fp_n0=Fp_n0, Fp_npos=Fp_npos,
        beta_n0=beta_n0, beta_npos=beta_npos, beta_tilde_n0=beta_tilde_n0,
        beta_tilde_npos=beta_tilde_npos, normalized_force=F / F_id,
        normalized_gradient=Fp / Fp_id, classical_mode=mode)


def model_from_config(config: RunConfig) -> ModelSpec:
    return ModelSpec(prescription=config.prescription, boundary=config.boundary,
                     omega_p=tuple(config.omega_p_eV), gamma=config.gamma_eV,
                     temperature=config.temperature_K)


def evaluate_point(config: RunConfig, a: float) -> SweepRow:
    """One sweep point; failures become an error row"""
    try:
        geom = config.geometry(a)
        result = deviation(geom, model_from_config(config), config.plan_for(geom),
                           classical_mode=config.classical_mode, rel_tol=config.quad_rel_tol)
        logger.info(f"a={a:.4g} um done: beta={result.beta:.4f}, beta_tilde={result.beta_tilde:.4f}")
        return SweepRow(a=a, result=result)
    except Exception as e:
        logger.error(f"a={a:.4g} um failed: {e}")
        return SweepRow(a=a, error=f"{type(e).__name__}: {e}")


async def sweep_async(config: RunConfig) -> List[SweepRow]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        tasks = [loop.run_in_executor(pool, evaluate_point, config, a)
                 for a in config.separations()]
        rows = await asyncio.gather(*tasks)
    return sorted(rows, key=lambda row: row.a)


def sweep(config: RunConfig) -> List[SweepRow]:
    """Evaluate every configured separation; ordered by a"""
    return asyncio.run(sweep_async(config))


def write_csv(rows: List[SweepRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_row())
    return path


def write_json(rows: List[SweepRow], path: Union[str, Path],
               config: Optional[RunConfig] = None) -> Path:
    """Rows in eV/um units plus SI columns, with the configuration echoed"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": config.to_dict() if config is not None else None,
        "units": {"force": "eV/um", "gradient": "eV/um^2", "si_force_factor": FORCE_TO_SI,
                  "si_gradient_factor": GRADIENT_TO_SI, "eV": constants.e},
        "rows": [{"a_um": row.a, "error": row.error,
                  "result": asdict(row.result) if row.result is not None else None,
                  "si": row.to_row()} for row in rows],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2)
    return path
