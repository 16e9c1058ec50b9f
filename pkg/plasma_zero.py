"""
Zero-frequency TE contribution of plasma spheres in the spherical multipole basis

The round-trip operator is written as A A^T with a symmetrised rectangular
matrix A whose weight sits on an oblique strip. Large aspect ratios are
handled by block decimation of A.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError
from scipy.special import gammaln

from bispherical_zero import (ClassicalResult, FD_STEP, bispherical_from_spheres,
                              neumann_classical, tm_classical)
from errors import ConvergenceError, DecimationError
from geometry import SphereGeometry, TruncationPlan
from materials import HBAR_C, K_B
from numerics import logdet_cholesky, richardson_derivatives

logger = logging.getLogger(__name__)

SERIES_LIMIT = 1e-3
CF_TOLERANCE = 1e-14
CF_MAX_TERMS = 10_000_000
EXACT_TE_LIMIT = 1200
M_SMALL_TERMS_TO_STOP = 2

# record layout of the per-m debug dump
LOGDET_DTYPE = np.dtype([("m", "<i4"), ("dimension", "<i4"), ("value", "<f8")])

OmegaP = Union[float, Tuple[float, float]]


def _lentz_bessel_ratio(nu: float, w: float) -> float:
    """I_{nu+1}(w)/I_nu(w) as the continued fraction 1/(b1 + 1/(b2 + ...)), b_j = 2(nu+j)/w"""
    tiny = 1e-300
    f = tiny
    c, d = f, 0.0
    for j in range(1, CF_MAX_TERMS):
        b = 2.0 * (nu + j) / w
        d = b + d
        d = tiny if d == 0 else d
        c = b + 1.0 / c
        c = tiny if c == 0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < CF_TOLERANCE:
            return f
    raise ConvergenceError(f"Bessel ratio continued fraction did not converge (nu={nu}, w={w})")


@lru_cache(maxsize=64)
def _bessel_ratios(l_top: int, w: float) -> np.ndarray:
    """rho_j = I_{j+1/2}(w)/I_{j-1/2}(w) for j = 0 .. l_top + 1"""
    nu = np.arange(l_top + 2) - 0.5
    if w < SERIES_LIMIT:
        q = 0.25 * w * w
        return (0.5 * w / (nu + 1)) * (1 + q / (nu + 2)) / (1 + q / (nu + 1))
    rho = np.empty(l_top + 2)
    rho[-1] = _lentz_bessel_ratio(nu[-1], w)
    for j in range(l_top, -1, -1):
        rho[j] = 1.0 / (2.0 * (nu[j] + 1.0) / w + rho[j + 1])
    return rho


def mie_ratio(l, w: float):
    """r_l = l/(l+1) I_{l+3/2}(w)/I_{l-1/2}(w), w = omega_p R / c"""
    if w <= 0:
        raise ValueError(f"w must be positive, got {w}")
    l_arr = np.asarray(l, dtype=int)
    if np.any(l_arr < 0):
        raise ValueError("multipole order must be non-negative")
    # top order rounded up to share one recurrence across m
    l_top = 256 * (int(np.max(l_arr)) // 256 + 1)
    rho = _bessel_ratios(l_top, float(w))
    r = l_arr / (l_arr + 1.0) * rho[l_arr] * rho[l_arr + 1]
    if r.ndim == 0:
        return float(r)
    return r


@dataclass
class StripMatrix:
    """Rows l-|m| in [0, N1), columns l'-|m| in [0, N2); zero outside the stored band"""
    shape: Tuple[int, int]
    col_start: np.ndarray
    values: np.ndarray

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def take(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Dense sub-matrix at the given row and column indices"""
        offset = cols[None, :] - self.col_start[rows][:, None]
        inside = (offset >= 0) & (offset < self.width)
        safe = np.where(inside, offset, 0)
        return np.where(inside, self.values[rows[:, None], safe], 0.0)

    def to_dense(self) -> np.ndarray:
        return self.take(np.arange(self.shape[0]), np.arange(self.shape[1]))


def _pair(omega_p: OmegaP) -> Tuple[float, float]:
    if isinstance(omega_p, (tuple, list)):
        return float(omega_p[0]), float(omega_p[1])
    return float(omega_p), float(omega_p)


def build_A_strip(m: int, geom: SphereGeometry, omega_p: OmegaP,
                  plan: TruncationPlan) -> StripMatrix:
    """Symmetrised TE round-trip factor for azimuthal number m, stored on its strip"""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    if geom.is_sphere_plate:
        raise ValueError("spherical-multipole TE computation needs two finite spheres")
    R1, R2, L = geom.R1, geom.R2, geom.center_distance
    w1, w2 = (op * R / HBAR_C for op, R in zip(_pair(omega_p), (R1, R2)))

    l = m + np.arange(plan.N1, dtype=float)
    l_prime_all = m + np.arange(plan.N2, dtype=float)

    # band of l' around l R2/R1, widening like sqrt(l) beyond l0 = R1/a
    l0 = R1 / geom.a
    half = np.ceil(plan.strip_factor * plan.delta2 * np.sqrt(np.maximum(1.0, l / l0)))
    centre = np.rint(l * R2 / R1) - m
    start = np.clip(centre - half, 0, plan.N2 - 1).astype(int)
    stop = np.clip(centre + half + 1, 1, plan.N2).astype(int)
    width = int(max(1, np.max(stop - start)))
    start = np.minimum(start, plan.N2 - width).clip(min=0)

    cols = start[:, None] + np.arange(width)[None, :]
    lp = l_prime_all[np.minimum(cols, plan.N2 - 1)]
    lr = l[:, None]

    with np.errstate(divide="ignore"):
        log_r1 = np.log(mie_ratio(l.astype(int), w1))
        log_r2 = np.log(mie_ratio(l_prime_all.astype(int), w2))
    log_a = ((lr + 0.5) * math.log(R1 / L) + 0.5 * log_r1[:, None]
             + gammaln(lr + lp + 1)
             - 0.5 * (gammaln(lr + m + 1) + gammaln(lr - m + 1)
                      + gammaln(lp + m + 1) + gammaln(lp - m + 1))
             + (lp + 0.5) * math.log(R2 / L)
             + 0.5 * log_r2[np.minimum(cols, plan.N2 - 1)])
    values = np.exp(log_a)
    in_band = cols < stop[:, None]
    values = np.where(in_band, values, 0.0)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError(f"non-finite A-matrix element for m={m}")
    return StripMatrix(shape=(plan.N1, plan.N2), col_start=start, values=values)


def decimate(strip: StripMatrix, p1: int, p2: int) -> np.ndarray:
    """sqrt(p1 p2) times the upper-left element of every p1 x p2 block"""
    n1, n2 = strip.shape[0] // p1, strip.shape[1] // p2
    rows = p1 * np.arange(n1)
    cols = p2 * np.arange(n2)
    return math.sqrt(p1 * p2) * strip.take(rows, cols)


def _logdet_term(m: int, geom: SphereGeometry, omega_p: OmegaP,
                 plan: TruncationPlan) -> Tuple[float, int]:
    """ln det(1 - A A^T) for one m, on the smaller Gram side"""
    reduced = decimate(build_A_strip(m, geom, omega_p, plan), plan.p1, plan.p2)
    gram = reduced @ reduced.T if reduced.shape[0] <= reduced.shape[1] else reduced.T @ reduced
    size = gram.shape[0]
    try:
        return logdet_cholesky(np.eye(size) - gram), size
    except LinAlgError:
        raise DecimationError("decimation blocks too large", m)


def _terms_for(ms: Sequence[int], geom: SphereGeometry, omega_p: OmegaP,
               plan: TruncationPlan, workers: int) -> List[Tuple[float, int]]:
    if workers <= 1 or len(ms) == 1:
        return [_logdet_term(m, geom, omega_p, plan) for m in ms]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda m: _logdet_term(m, geom, omega_p, plan), ms))


def _adaptive_terms(geom: SphereGeometry, omega_p: OmegaP, plan: TruncationPlan,
                    workers: int) -> List[Tuple[int, float, int]]:
    """Per-m terms from m = 0 up to at least plan.m_max, then until negligible"""
    records: List[Tuple[int, float, int]] = []
    total = 0.0
    small_run = 0
    m = 0
    m_cap = plan.N1 + plan.m_max
    batch = max(1, workers)
    while m <= m_cap:
        ms = list(range(m, min(m + batch, m_cap + 1)))
        for mm, (value, size) in zip(ms, _terms_for(ms, geom, omega_p, plan, workers)):
            weighted = value * (0.5 if mm == 0 else 1.0)
            total += weighted
            records.append((mm, value, size))
            logger.debug(f"TE plasma m={mm}: ln det = {value:.6e} (dim {size})")
            if mm >= plan.m_max:
                small = abs(weighted) < plan.m_tolerance * abs(total)
                small_run = small_run + 1 if small else 0
        m = ms[-1] + 1
        if small_run >= M_SMALL_TERMS_TO_STOP:
            break
    return records


def _weighted_sum(values: Iterable[Tuple[int, float]]) -> float:
    return sum(v * (0.5 if m == 0 else 1.0) for m, v in values)


def te_plasma_classical(geom: SphereGeometry, temperature: float, omega_p: OmegaP,
                        plan: Optional[TruncationPlan] = None, decimation: bool = True,
                        workers: int = 1,
                        dump_path: Optional[Union[str, Path]] = None) -> ClassicalResult:
    """kT sum'_m ln det(1 - A_m A_m^T) with Richardson forces"""
    if plan is None:
        plan = TruncationPlan.for_geometry(geom)
    if not decimation and plan.decimated:
        plan = plan.with_blocks(1, 1)
    kT = K_B * temperature

    try:
        records = _adaptive_terms(geom, omega_p, plan, workers)
    except DecimationError as exc:
        if not plan.decimated:
            raise
        plan = plan.with_blocks(max(1, plan.p1 // 2), max(1, plan.p2 // 2))
        logger.warning(f"Decimation failed at m={exc.m}; retrying with blocks "
                       f"{plan.p1}x{plan.p2}")
        records = _adaptive_terms(geom, omega_p, plan, workers)

    if dump_path is not None:
        dump_logdet_terms(dump_path, records)

    ms = [m for m, _, _ in records]
    energy = kT * _weighted_sum((m, v) for m, v, _ in records)

    def energy_at(a: float) -> float:
        shifted = geom.with_gap(a)
        try:
            terms = _terms_for(ms, shifted, omega_p, plan, workers)
        except DecimationError as exc:
            raise DecimationError(f"round-trip matrix not positive definite at shifted gap "
                                  f"a={a:.6g} um", exc.m) from exc
        return kT * _weighted_sum(zip(ms, (v for v, _ in terms)))

    deriv = richardson_derivatives(energy_at, geom.a, FD_STEP * geom.a)
    logger.info(f"TE plasma term at a={geom.a} um: {len(ms)} m values, "
                f"{plan.n1}x{plan.n2} matrices (blocks {plan.p1}x{plan.p2})")
    return ClassicalResult(energy=energy, force=-deriv.first, gradient=-deriv.second,
                           l_max=plan.N1, m_max=ms[-1], derivative_error=deriv.first_error)


def resolve_plasma_mode(plan: TruncationPlan, mode: str = "auto") -> str:
    """'exact' or 'pc_substitute' for the TE zero-frequency term"""
    if mode not in ("auto", "exact", "pc_substitute"):
        raise ValueError(f"unknown plasma classical mode: {mode}")
    if mode != "auto":
        return mode
    if plan.N1 <= EXACT_TE_LIMIT:
        return "exact"
    logger.warning(f"N1={plan.N1} > {EXACT_TE_LIMIT}: using the perfect-conductor "
                   f"TE term in place of the plasma one")
    return "pc_substitute"


def plasma_classical_total(geom: SphereGeometry, temperature: float, omega_p: OmegaP,
                           boundary: str = "grounded", plan: Optional[TruncationPlan] = None,
                           mode: str = "auto", workers: int = 1) -> ClassicalResult:
    """Plasma zero-frequency term: TM as for Drude plus the TE plasma term"""
    if plan is None:
        plan = TruncationPlan.for_geometry(geom)
    bg = bispherical_from_spheres(geom)
    tm = tm_classical(bg, temperature, boundary, plan.l_max_bispherical)
    if resolve_plasma_mode(plan, mode) == "exact":
        te = te_plasma_classical(geom, temperature, omega_p, plan, workers=workers)
    else:
        te = neumann_classical(bg, temperature, plan.l_max_bispherical)
    total = tm + te
    total.parts = {"TM": tm, "TE": te}
    return total


def dump_logdet_terms(path: Union[str, Path], records: Sequence[Tuple[int, float, int]]) -> Path:
    """Write (m, dimension, value) records as little-endian int32, int32, float64"""
    path = Path(path)
    data = np.array([(m, size, value) for m, value, size in records], dtype=LOGDET_DTYPE)
    data.tofile(path)
    return path


def read_logdet_terms(path: Union[str, Path]) -> np.ndarray:
    return np.fromfile(path, dtype=LOGDET_DTYPE)
