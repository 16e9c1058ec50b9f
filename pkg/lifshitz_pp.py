"""
Plane-parallel Casimir quantities from the Lifshitz formula
Free energy per area, pressure and the integrated free energy G with a
clean split between the zero and the positive Matsubara frequencies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import spence

from errors import ConvergenceError
from materials import (HBAR_C, MatsubaraGrid, PermittivityModel, epsilon_imag_axis,
                       fresnel, matsubara_grid, zero_frequency_reflection)

logger = logging.getLogger(__name__)

# integration window in t = y - y0 above the light cone, and modes per quad_vec call
Y_SPAN = 50.0
Y_PANELS = (0.5, 2.0, 6.0, 15.0, 30.0)
CHUNK = 16
QUAD_LIMIT = 4000
ABS_FLOOR = 1e-3
ACCEPT_FACTOR = 100.0
MAX_LOG_SCALE = 600.0
SMALL_TERMS_TO_STOP = 3


class MatsubaraModes(Enum):
    ZERO_ONLY = "zero_only"
    POSITIVE_ONLY = "positive_only"
    ALL = "all"


class Polarization(Enum):
    TE_ONLY = "TE_only"
    TM_ONLY = "TM_only"
    BOTH = "both"


@dataclass(frozen=True)
class ModeFilter:
    matsubara: MatsubaraModes = MatsubaraModes.ALL
    polarization: Polarization = Polarization.BOTH

    @property
    def includes_zero(self) -> bool:
        return self.matsubara is not MatsubaraModes.POSITIVE_ONLY

    @property
    def includes_positive(self) -> bool:
        return self.matsubara is not MatsubaraModes.ZERO_ONLY

    @property
    def includes_te(self) -> bool:
        return self.polarization is not Polarization.TM_ONLY

    @property
    def includes_tm(self) -> bool:
        return self.polarization is not Polarization.TE_ONLY


ALL_MODES = ModeFilter()
ZERO_ONLY = ModeFilter(MatsubaraModes.ZERO_ONLY)
POSITIVE_ONLY = ModeFilter(MatsubaraModes.POSITIVE_ONLY)


@dataclass
class PlanarResult:
    """Slab-slab quantities in eV/um^2, eV/um^3 and eV/um"""
    free_energy_per_area: float
    pressure: float
    gee: float
    free_energy_error: float
    pressure_error: float
    gee_error: float
    n_terms: int


def polylog2(x):
    """Dilogarithm Li2(x) for real x <= 1"""
    return spence(1.0 - np.asarray(x, dtype=float))


def _reflector(model: PermittivityModel, xi: np.ndarray) -> Callable:
    """k_perp -> (r_TE, r_TM) for a fixed chunk of Matsubara frequencies"""
    if xi[0] == 0:
        if model.zero_frequency_rule is None:
            raise ValueError("zero Matsubara mode needs a model with a zero-frequency rule")
        return lambda k: zero_frequency_reflection(model, k)
    eps = epsilon_imag_axis(model, xi)
    return lambda k: fresnel(eps, xi, k)


def _integrate_chunk(a: float, xi: np.ndarray, model1: PermittivityModel,
                     model2: PermittivityModel, mode_filter: ModeFilter,
                     rel_tol: float) -> Tuple[np.ndarray, float]:
    """Raw y-integrals (3, len(xi)) of ln(1-x) y, y^2 x/(1-x) and Li2(x), x = r1 r2 e^-y"""
    zeta = xi / HBAR_C
    y0 = 2 * a * zeta
    reflect1 = _reflector(model1, xi)
    reflect2 = _reflector(model2, xi)

    # each mode is integrated in units of its own e^-y0 so the chunk shares one scale
    rescale = np.exp(-np.minimum(y0, MAX_LOG_SCALE))

    def integrand(t):
        y = y0 + t
        k_perp = np.sqrt(t * (2 * y0 + t)) / (2 * a)
        te1, tm1 = reflect1(k_perp)
        te2, tm2 = reflect2(k_perp)
        out = np.zeros((3, len(xi)))
        for include, r_prod in ((mode_filter.includes_te, te1 * te2),
                                (mode_filter.includes_tm, tm1 * tm2)):
            if not include:
                continue
            r_prod = np.broadcast_to(np.asarray(r_prod, dtype=float), y.shape)
            x = r_prod * np.exp(-y)
            # 1 - x without cancellation when r_prod e^-y is close to 1
            with np.errstate(divide="ignore"):
                one_minus = np.where(r_prod > 0, -np.expm1(np.log(np.abs(r_prod)) - y), 1.0 - x)
            out[0] += y * np.log(one_minus)
            out[1] += y * y * x / one_minus
            out[2] += polylog2(x)
        return (out / rescale).ravel()

    values, error, info = quad_vec(integrand, 0.0, Y_SPAN, epsrel=rel_tol,
                                   epsabs=rel_tol * ABS_FLOOR, norm="max",
                                   points=Y_PANELS, limit=QUAD_LIMIT, full_output=True)
    values = values.reshape(3, len(xi))
    reached = float(error) <= ACCEPT_FACTOR * rel_tol * max(float(np.max(np.abs(values))), ABS_FLOOR)
    if info.status != 0:
        if not reached:
            raise ConvergenceError(f"k_perp quadrature failed at a={a} um: {info.message} "
                                   f"(error {float(error):.3g})")
        logger.debug(f"k_perp quadrature at a={a} um accepted with error {float(error):.3g}")

    values = values * rescale
    tail = float(np.max(2 * (y0 + Y_SPAN + 1) ** 2 * np.exp(-(y0 + Y_SPAN))))
    return values, float(error) * float(np.max(rescale)) + tail


def planar_quantities(a: float, temperature: float, model1: PermittivityModel,
                      model2: PermittivityModel, mode_filter: ModeFilter = ALL_MODES,
                      rel_tol: float = 1e-8,
                      grid: Optional[MatsubaraGrid] = None) -> PlanarResult:
    """Free energy, pressure and G of two half-spaces at separation a (um)"""
    if a <= 0:
        raise ValueError(f"separation must be positive, got {a}")
    if grid is None:
        grid = matsubara_grid(temperature, a, rel_tol=min(rel_tol, 1e-10))
    kT = grid.kT

    scale = np.array([kT / (2 * np.pi) / (4 * a * a),
                      -kT / (2 * np.pi) / (4 * a ** 3),
                      kT / (4 * np.pi) / (2 * a)])
    totals = np.zeros(3)
    errors = np.zeros(3)
    n_terms = 0

    if mode_filter.includes_zero:
        values, error = _integrate_chunk(a, grid.frequencies[:1], model1, model2,
                                         mode_filter, rel_tol)
        totals += 0.5 * scale * values[:, 0]
        errors += 0.5 * np.abs(scale) * error
        n_terms += 1

    if mode_filter.includes_positive:
        small_run = 0
        done = False
        for start in range(1, grid.n_max + 1, CHUNK):
            xi = grid.frequencies[start:start + CHUNK]
            values, error = _integrate_chunk(a, xi, model1, model2, mode_filter, rel_tol)
            errors += np.abs(scale) * error
            for j in range(len(xi)):
                term = scale * values[:, j]
                totals += term
                n_terms += 1
                small = np.all(np.abs(term) <= rel_tol * np.abs(totals))
                small_run = small_run + 1 if small else 0
                if small_run >= SMALL_TERMS_TO_STOP:
                    done = True
                    break
            if done:
                break
        logger.debug(f"Matsubara sum at a={a} um stopped after {n_terms} terms")

    return PlanarResult(free_energy_per_area=float(totals[0]), pressure=float(totals[1]),
                        gee=float(totals[2]), free_energy_error=float(errors[0]),
                        pressure_error=float(errors[1]), gee_error=float(errors[2]),
                        n_terms=n_terms)


def free_energy_pp(a: float, temperature: float, model1: PermittivityModel,
                   model2: PermittivityModel, mode_filter: ModeFilter = ALL_MODES,
                   rel_tol: float = 1e-8) -> float:
    """Free energy per unit area in eV/um^2"""
    return planar_quantities(a, temperature, model1, model2, mode_filter,
                             rel_tol).free_energy_per_area


def pressure_pp(a: float, temperature: float, model1: PermittivityModel,
                model2: PermittivityModel, mode_filter: ModeFilter = ALL_MODES,
                rel_tol: float = 1e-8) -> float:
    """Pressure -dF/da in eV/um^3 (negative means attraction)"""
    return planar_quantities(a, temperature, model1, model2, mode_filter, rel_tol).pressure


def gee_pp(a: float, temperature: float, model1: PermittivityModel,
           model2: PermittivityModel, rel_tol: float = 1e-8) -> float:
    """G = -integral of the n>0 free energy from a to infinity, in eV/um"""
    return planar_quantities(a, temperature, model1, model2, POSITIVE_ONLY, rel_tol).gee
