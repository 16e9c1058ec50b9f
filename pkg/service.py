"""
Service layer for the Casimir calculations
Wraps the library in JSON-friendly calls used by the CLI and the web API.
"""

from typing import Dict, Any, Optional
from dataclasses import asdict
import asyncio
import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy

from assembly import ModelSpec, classical_term, deviation, model_from_config, weights
from config import config_from_dict, env_defaults
from de_tables import COEFFICIENTS, SEPARATIONS_UM, tables_as_rows
from errors import CasimirError, ConfigError, RangeError
from lifshitz_pp import ALL_MODES, POSITIVE_ONLY, ZERO_ONLY, planar_quantities
from materials import FORCE_TO_SI, GRADIENT_TO_SI, thermal_length

logger = logging.getLogger(__name__)

MODE_FILTERS = {"all": ALL_MODES, "zero": ZERO_ONLY, "positive": POSITIVE_ONLY}
INPUT_ERRORS = (ConfigError, RangeError, ValueError, KeyError, TypeError)


def _failure(exc: Exception) -> Dict[str, Any]:
    kind = "input" if isinstance(exc, INPUT_ERRORS) else "computation"
    return {"success": False, "error": f"{type(exc).__name__}: {exc}", "error_type": kind}


class CasimirService:
    """Async wrapper running the solvers off the event loop"""

    def __init__(self, workers: Optional[int] = None):
        self.workers = max(1, workers or env_defaults()["workers"])
        self.executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="casimir")

    async def _run(self, func, *args):
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self.executor, func, *args)

    async def planar(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """Slab-slab free energy, pressure and G at one separation"""
        try:
            env = env_defaults()
            a = float(params["a_um"])
            modes = str(params.get("modes", "all")).lower()
            if modes not in MODE_FILTERS:
                raise ValueError(f"modes must be one of {sorted(MODE_FILTERS)}, got '{modes}'")
            omega = params.get("omega_p_eV", env["omega_p_eV"])
            model = ModelSpec(prescription=params.get("prescription", "drude"),
                              omega_p=tuple(omega) if isinstance(omega, list) else float(omega),
                              gamma=float(params.get("gamma_eV", env["gamma_eV"])),
                              temperature=float(params.get("temperature_K", env["temperature_K"])))
            m1, m2 = model.materials()
            result = await self._run(planar_quantities, a, model.temperature, m1, m2,
                                     MODE_FILTERS[modes])
            return {
                "success": True,
                "a_um": a,
                "modes": modes,
                "free_energy_eV_per_um2": result.free_energy_per_area,
                "pressure_eV_per_um3": result.pressure,
                "gee_eV_per_um": result.gee,
                "pressure_Pa": result.pressure * FORCE_TO_SI / 1e-12,
                "n_terms": result.n_terms,
            }
        except (CasimirError, *INPUT_ERRORS) as e:
            logger.error(f"Planar calculation failed: {e}")
            return _failure(e)

    async def classical(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """Zero-frequency sphere-sphere force and gradient"""
        try:
            config = config_from_dict(params)
            geom = config.geometry(config.separations()[0])
            model = model_from_config(config)
            result, mode = await self._run(classical_term, geom, model, config.plan_for(geom),
                                           config.classical_mode, config.workers)
            return {
                "success": True,
                "a_um": geom.a,
                "classical_mode": mode,
                "energy_eV": result.energy,
                "force_N": result.force * FORCE_TO_SI,
                "gradient_N_per_m": result.gradient * GRADIENT_TO_SI,
                "l_max": result.l_max,
                "m_max": result.m_max,
                "parts": {name: {"force_N": part.force * FORCE_TO_SI,
                                 "gradient_N_per_m": part.gradient * GRADIENT_TO_SI}
                          for name, part in result.parts.items()},
            }
        except (CasimirError, *INPUT_ERRORS, np.linalg.LinAlgError) as e:
            logger.error(f"Classical calculation failed: {e}")
            return _failure(e)

    async def deviation(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """Full deviation from PFA at one separation"""
        try:
            config = config_from_dict(params)
            geom = config.geometry(config.separations()[0])
            result = await self._run(lambda: deviation(
                geom, model_from_config(config), config.plan_for(geom),
                classical_mode=config.classical_mode, rel_tol=config.quad_rel_tol,
                workers=config.workers))
            return {"success": True, "result": asdict(result), "si": result.to_row()}
        except (CasimirError, *INPUT_ERRORS, np.linalg.LinAlgError) as e:
            logger.error(f"Deviation calculation failed: {e}")
            return _failure(e)

    async def weights(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """Zero-frequency weights w and w_tilde of the PFA force and gradient"""
        try:
            config = config_from_dict(params)
            a = config.separations()[0]
            w, w_tilde = await self._run(weights, a, model_from_config(config),
                                         config.quad_rel_tol)
            return {"success": True, "a_um": a, "w": w, "w_tilde": w_tilde}
        except (CasimirError, *INPUT_ERRORS) as e:
            logger.error(f"Weight calculation failed: {e}")
            return _failure(e)

    def tables(self) -> Dict[str, Any]:
        return {"success": True, "separations_um": list(SEPARATIONS_UM), "rows": tables_as_rows()}

    def status(self) -> Dict[str, Any]:
        env = env_defaults()
        return {
            "success": True,
            "status": "running",
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "prescriptions": sorted(COEFFICIENTS),
            "defaults": env,
            "thermal_length_um": thermal_length(env["temperature_K"]),
            "workers": self.workers,
            "pid": os.getpid(),
        }


# Global service instance
casimir_service = CasimirService()
