"""
Dielectric response of the sphere materials on the imaginary frequency axis
Fresnel reflection coefficients and Matsubara frequency grids

Units: frequencies are carried as hbar*xi in eV, lengths in micrometers,
wave numbers in 1/micrometer.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy import constants
from scipy.interpolate import PchipInterpolator

from errors import RangeError, TableFormatError

logger = logging.getLogger(__name__)

# hbar*c in eV*um and Boltzmann constant in eV/K
HBAR_C = constants.hbar * constants.c / constants.e * 1e6
K_B = constants.k / constants.e
HBAR_EV_S = constants.hbar / constants.e

# eV/um -> N and eV/um^2 -> N/m
FORCE_TO_SI = constants.e / 1e-6
GRADIENT_TO_SI = constants.e / 1e-12

ArrayLike = Union[float, np.ndarray]


class ModelKind(Enum):
    DRUDE = "drude"
    PLASMA = "plasma"
    PERFECT_CONDUCTOR = "pc"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class PermittivityModel:
    """Permittivity model; omega_p and gamma are hbar*omega in eV"""
    kind: ModelKind
    omega_p: float = 0.0
    gamma: float = 0.0
    xi_table: Tuple[float, ...] = ()
    eps_table: Tuple[float, ...] = ()
    zero_frequency: Optional[str] = None
    _interp: Optional[PchipInterpolator] = field(default=None, repr=False, compare=False)

    @classmethod
    def drude(cls, omega_p: float, gamma: float) -> "PermittivityModel":
        if omega_p <= 0:
            raise ValueError(f"omega_p must be positive, got {omega_p}")
        if gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {gamma}")
        return cls(ModelKind.DRUDE, omega_p=omega_p, gamma=gamma)

    @classmethod
    def plasma(cls, omega_p: float) -> "PermittivityModel":
        if omega_p <= 0:
            raise ValueError(f"omega_p must be positive, got {omega_p}")
        return cls(ModelKind.PLASMA, omega_p=omega_p)

    @classmethod
    def perfect_conductor(cls) -> "PermittivityModel":
        return cls(ModelKind.PERFECT_CONDUCTOR)

    @classmethod
    def tabulated(cls, xi, eps, zero_frequency: Optional[str] = None,
                  omega_p: float = 0.0) -> "PermittivityModel":
        """Tabulated eps(i xi); zero_frequency is None, 'drude' or 'plasma'"""
        xi = np.asarray(xi, dtype=float)
        eps = np.asarray(eps, dtype=float)
        if xi.ndim != 1 or xi.shape != eps.shape or len(xi) < 2:
            raise ValueError("table needs at least two (xi, eps) pairs")
        if np.any(xi <= 0) or np.any(np.diff(xi) <= 0):
            raise ValueError("table frequencies must be positive and strictly increasing")
        if np.any(eps < 1):
            raise ValueError("table permittivities must be >= 1")
        if np.any(np.diff(eps) > 0):
            raise ValueError("table permittivities must not increase with frequency")
        if zero_frequency not in (None, "drude", "plasma"):
            raise ValueError(f"unknown zero-frequency rule: {zero_frequency}")
        if zero_frequency == "plasma" and omega_p <= 0:
            raise ValueError("plasma zero-frequency rule needs omega_p > 0")
        log_excess = np.log(np.maximum(eps - 1.0, 1e-300))
        interp = PchipInterpolator(np.log(xi), log_excess, extrapolate=False)
        return cls(ModelKind.TABULATED, omega_p=omega_p,
                   xi_table=tuple(xi), eps_table=tuple(eps),
                   zero_frequency=zero_frequency, _interp=interp)

    @property
    def is_perfect(self) -> bool:
        return self.kind is ModelKind.PERFECT_CONDUCTOR

    @property
    def zero_frequency_rule(self) -> Optional[str]:
        """Which zero-frequency reflection rule applies, None if undefined"""
        if self.kind is ModelKind.TABULATED:
            return self.zero_frequency
        return self.kind.value


@dataclass(frozen=True)
class MatsubaraGrid:
    temperature: float
    n_max: int
    frequencies: np.ndarray
    thermal_length: float

    @property
    def kT(self) -> float:
        return K_B * self.temperature

    @property
    def frequencies_rad_s(self) -> np.ndarray:
        return self.frequencies / HBAR_EV_S

    @property
    def thermal_length_m(self) -> float:
        return self.thermal_length * 1e-6


def thermal_length(temperature: float) -> float:
    """lambda_T = hbar c / (2 pi k_B T) in micrometers"""
    return HBAR_C / (2 * math.pi * K_B * temperature)


def epsilon_imag_axis(model: PermittivityModel, xi: ArrayLike) -> ArrayLike:
    """eps(i xi) for hbar*xi in eV; perfect conductors return math.inf"""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0):
        raise ValueError("epsilon_imag_axis needs xi > 0; zero frequency has its own rules")

    if model.kind is ModelKind.PERFECT_CONDUCTOR:
        result = np.full_like(xi_arr, math.inf)
    elif model.kind is ModelKind.DRUDE:
        result = 1.0 + model.omega_p ** 2 / (xi_arr * (xi_arr + model.gamma))
    elif model.kind is ModelKind.PLASMA:
        result = 1.0 + model.omega_p ** 2 / xi_arr ** 2
    else:
        lo, hi = model.xi_table[0], model.xi_table[-1]
        if np.any(xi_arr < lo) or np.any(xi_arr > hi):
            raise RangeError(f"xi outside tabulated range [{lo}, {hi}] eV")
        result = 1.0 + np.exp(model._interp(np.log(xi_arr)))

    if np.ndim(xi) == 0:
        return float(result)
    return result


def fresnel(eps: ArrayLike, xi: ArrayLike, k_perp: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """(r_TE, r_TM) for hbar*xi in eV and k_perp in 1/um"""
    eps_arr, zeta, k = np.broadcast_arrays(
        np.asarray(eps, dtype=float), np.asarray(xi, dtype=float) / HBAR_C,
        np.asarray(k_perp, dtype=float))
    if np.any(zeta <= 0) or np.any(k < 0) or np.any(eps_arr < 1):
        raise ValueError("fresnel needs xi > 0, k_perp >= 0 and eps >= 1")

    perfect = np.isinf(eps_arr)
    eps_f = np.where(perfect, 1.0, eps_arr)
    q = np.sqrt(zeta ** 2 + k ** 2)
    k_in = np.sqrt(q ** 2 + (eps_f - 1.0) * zeta ** 2)
    r_te = np.where(perfect, -1.0, (q - k_in) / (q + k_in))
    r_tm = np.where(perfect, 1.0, (eps_f * q - k_in) / (eps_f * q + k_in))

    if r_te.ndim == 0:
        return float(r_te), float(r_tm)
    return r_te, r_tm


def zero_frequency_reflection(model: PermittivityModel, k_perp: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """(r_TE, r_TM) at xi = 0"""
    rule = model.zero_frequency_rule
    k = np.asarray(k_perp, dtype=float)
    if rule is None:
        raise ValueError("tabulated model has no zero-frequency rule")
    if rule == "pc":
        r_te = np.full_like(k, -1.0)
    elif rule == "drude":
        r_te = np.zeros_like(k)
    else:
        big_k = np.sqrt(k ** 2 + (model.omega_p / HBAR_C) ** 2)
        r_te = (k - big_k) / (k + big_k)
    r_tm = np.ones_like(k)
    if r_te.ndim == 0:
        return float(r_te), float(r_tm)
    return r_te, r_tm


def reflection(model: PermittivityModel, xi: ArrayLike, k_perp: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """Reflection coefficients on a (xi, k_perp) grid, zero frequency included"""
    xi_arr, k = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(k_perp, dtype=float))
    r_te = np.empty(xi_arr.shape)
    r_tm = np.empty(xi_arr.shape)
    static = xi_arr == 0
    if np.any(static):
        r_te[static], r_tm[static] = zero_frequency_reflection(model, k[static])
    moving = ~static
    if np.any(moving):
        eps = epsilon_imag_axis(model, xi_arr[moving])
        r_te[moving], r_tm[moving] = fresnel(eps, xi_arr[moving], k[moving])
    return r_te, r_tm


def matsubara_grid(temperature: float, a_min: float, rel_tol: float = 1e-10) -> MatsubaraGrid:
    """Matsubara frequencies hbar*xi_n = 2 pi n k_B T up to a tail below rel_tol at a_min"""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if a_min <= 0:
        raise ValueError(f"a_min must be positive, got {a_min}")
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")

    lam = thermal_length(temperature)
    c_factor = 0.5 * math.log(1.0 / rel_tol) + 2.0
    n_max = max(1, math.ceil(c_factor * lam / a_min))
    xi = 2 * math.pi * K_B * temperature * np.arange(n_max + 1)
    logger.debug(f"Matsubara grid T={temperature} K: n_max={n_max}, lambda_T={lam:.4f} um")
    return MatsubaraGrid(temperature=temperature, n_max=n_max,
                         frequencies=xi, thermal_length=lam)


def load_permittivity_table(path: Union[str, Path], zero_frequency: Optional[str] = None,
                            omega_p: float = 0.0) -> PermittivityModel:
    """Load a two-column (hbar*xi in eV, eps) table"""
    xi_values, eps_values = [], []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise TableFormatError(f"expected two columns, got {len(parts)}", line_no)
            try:
                xi, eps = float(parts[0]), float(parts[1])
            except ValueError:
                raise TableFormatError(f"cannot parse numbers from '{line}'", line_no)
            if xi <= 0:
                raise TableFormatError(f"frequency must be positive, got {xi}", line_no)
            if xi_values and xi <= xi_values[-1]:
                raise TableFormatError("frequencies must be strictly increasing", line_no)
            if eps < 1:
                raise TableFormatError(f"permittivity must be >= 1, got {eps}", line_no)
            if eps_values and eps > eps_values[-1]:
                raise TableFormatError("permittivity must not increase with frequency", line_no)
            xi_values.append(xi)
            eps_values.append(eps)

    if len(xi_values) < 2:
        raise TableFormatError("table needs at least two rows")
    logger.info(f"Loaded {len(xi_values)} permittivity rows from {path}")
    return PermittivityModel.tabulated(xi_values, eps_values, zero_frequency, omega_p)
