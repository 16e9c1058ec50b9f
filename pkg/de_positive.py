"""
Positive Matsubara contribution to the sphere-sphere force and force gradient
First-order derivative expansion around the slab-slab result, with the
curvature coefficients taken from the embedded gold tables.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

from de_tables import get_table
from geometry import SphereGeometry
from lifshitz_pp import POSITIVE_ONLY, planar_quantities
from materials import PermittivityModel

logger = logging.getLogger(__name__)

DE_VALIDITY_LIMIT = 0.1


@dataclass
class PositiveModeResult:
    """n>0 force (eV/um) or gradient (eV/um^2), its PFA part and the correction coefficient"""
    pfa: float
    value: float
    beta: float


def theta_lookup(a: float, prescription: str) -> Tuple[float, float]:
    """(theta, theta_tilde) at separation a in um"""
    coefficients = get_table(prescription).lookup(a)
    return coefficients["theta"], coefficients["theta_tilde"]


def coefficients_lookup(a: float, prescription: str) -> Tuple[float, float, float, float]:
    """(theta, kappa, theta_tilde, kappa_tilde) interpolated from the tables"""
    c = get_table(prescription).lookup(a)
    return c["theta"], c["kappa"], c["theta_tilde"], c["kappa_tilde"]


def kappa_compute(a: float, temperature: float, model1: PermittivityModel,
                  model2: PermittivityModel, rel_tol: float = 1e-8) -> Tuple[float, float]:
    """kappa = 1 + G/(a F) and kappa_tilde = 1 - 2 F/(a P) from the n>0 slab quantities"""
    if a <= 0:
        raise ValueError(f"separation must be positive, got {a}")
    pp = planar_quantities(a, temperature, model1, model2, POSITIVE_ONLY, rel_tol)
    kappa = 1.0 + pp.gee / (a * pp.free_energy_per_area)
    kappa_tilde = 1.0 - 2.0 * pp.free_energy_per_area / (a * pp.pressure)
    return kappa, kappa_tilde


def beta_positive(a: float, u: float, prescription: str) -> Tuple[float, float]:
    """(beta_{n>0}, beta_tilde_{n>0}); independent of the reduced radius"""
    theta, kappa, theta_t, kappa_t = coefficients_lookup(a, prescription)
    return -(theta + u * kappa), -(theta_t + u * kappa_t)


def _check_validity(geom: SphereGeometry):
    if geom.x > DE_VALIDITY_LIMIT:
        logger.warning(f"a/R = {geom.x:.3f} exceeds {DE_VALIDITY_LIMIT}; "
                       f"first-order derivative expansion may be inaccurate")


def force_positive(geom: SphereGeometry, temperature: float, model1: PermittivityModel,
                   model2: PermittivityModel, prescription: str,
                   rel_tol: float = 1e-8) -> PositiveModeResult:
    """F_{n>0} = 2 pi R F^pp_{n>0} [1 + beta_{n>0} a/R]"""
    _check_validity(geom)
    beta, _ = beta_positive(geom.a, geom.u, prescription)
    pp = planar_quantities(geom.a, temperature, model1, model2, POSITIVE_ONLY, rel_tol)
    pfa = 2 * math.pi * geom.reduced_radius * pp.free_energy_per_area
    return PositiveModeResult(pfa=pfa, value=pfa * (1.0 + beta * geom.x), beta=beta)


def grad_positive(geom: SphereGeometry, temperature: float, model1: PermittivityModel,
                  model2: PermittivityModel, prescription: str,
                  rel_tol: float = 1e-8) -> PositiveModeResult:
    """F'_{n>0} = -2 pi R P^pp_{n>0} [1 + beta_tilde_{n>0} a/R]"""
    _check_validity(geom)
    _, beta_tilde = beta_positive(geom.a, geom.u, prescription)
    pp = planar_quantities(geom.a, temperature, model1, model2, POSITIVE_ONLY, rel_tol)
    pfa = -2 * math.pi * geom.reduced_radius * pp.pressure
    return PositiveModeResult(pfa=pfa, value=pfa * (1.0 + beta_tilde * geom.x), beta=beta_tilde)
