"""
Exact zero-frequency Casimir interaction of two spheres in bispherical coordinates

Covers grounded Drude spheres (Dirichlet), isolated Drude spheres, the
perfect-conductor TE contribution (Neumann) and their asymptotic laws.
Energies are in eV, forces in eV/um and gradients in eV/um^2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve, solve_banded
from scipy.special import zeta

from errors import GeometryError, RangeError
from geometry import SphereGeometry, default_l_max
from materials import K_B
from numerics import logdet_one_minus, richardson_derivatives

logger = logging.getLogger(__name__)

GEOMETRY_RTOL = 1e-11
FD_STEP = 1e-3
M_SMALL_TERMS_TO_STOP = 2
M_TOLERANCE = 1e-12


@dataclass(frozen=True)
class BisphericalGeometry:
    """Bispherical parameters; dmu_* are derivatives of |mu_+-| with respect to a"""
    b: float
    mu_plus: float
    mu_minus: float
    spheres: SphereGeometry
    dmu_plus: Tuple[float, float] = (0.0, 0.0)
    dmu_minus: Tuple[float, float] = (0.0, 0.0)

    @property
    def Z_plus(self) -> float:
        return math.exp(-self.mu_plus)

    @property
    def Z_minus(self) -> float:
        return math.exp(self.mu_minus)

    @property
    def Z(self) -> float:
        return math.exp(-self.mu)

    @property
    def mu(self) -> float:
        """mu_+ + |mu_-|, so that Z = exp(-mu)"""
        return self.mu_plus - self.mu_minus

    @property
    def dmu(self) -> Tuple[float, float]:
        return (self.dmu_plus[0] + self.dmu_minus[0], self.dmu_plus[1] + self.dmu_minus[1])


@dataclass
class ClassicalResult:
    energy: float
    force: float
    gradient: float
    l_max: int
    m_max: int
    converged: bool = True
    parts: Dict[str, "ClassicalResult"] = field(default_factory=dict)
    derivative_error: float = 0.0

    def __add__(self, other: "ClassicalResult") -> "ClassicalResult":
        return ClassicalResult(energy=self.energy + other.energy,
                               force=self.force + other.force,
                               gradient=self.gradient + other.gradient,
                               l_max=max(self.l_max, other.l_max),
                               m_max=max(self.m_max, other.m_max),
                               converged=self.converged and other.converged,
                               derivative_error=self.derivative_error + other.derivative_error)


def _mu_with_derivatives(a: float, r_self: float, r_other: float) -> Tuple[float, float, float]:
    """|mu| of the sphere r_self and its first two derivatives in a"""
    if math.isinf(r_other):
        d, d1, d2 = a / r_self, 1.0 / r_self, 0.0
    else:
        L = r_self + r_other + a
        n = a * a + 2 * a * r_other
        n1 = 2 * a + 2 * r_other
        d = n / (2 * r_self * L)
        d1 = (n1 * L - n) / (2 * r_self * L * L)
        d2 = (L * L - n1 * L + n) / (r_self * L ** 3)
    sinh_mu = math.sqrt(d * (2 + d))
    mu = math.log1p(d + sinh_mu)
    mu1 = d1 / sinh_mu
    mu2 = (d2 - (1 + d) * mu1 * mu1) / sinh_mu
    return mu, mu1, mu2


def bispherical_from_spheres(geom: SphereGeometry) -> BisphericalGeometry:
    """Bispherical coordinates of two spheres (or sphere and plate)"""
    mu_p, mu_p1, mu_p2 = _mu_with_derivatives(geom.a, geom.R1, geom.R2)
    b = geom.R1 * math.sinh(mu_p)
    if geom.is_sphere_plate:
        mu_m, mu_m1, mu_m2 = 0.0, 0.0, 0.0
    else:
        mu_m, mu_m1, mu_m2 = _mu_with_derivatives(geom.a, geom.R2, geom.R1)
        r2 = b / math.sinh(mu_m)
        if abs(r2 - geom.R2) > GEOMETRY_RTOL * geom.R2:
            raise GeometryError(f"bispherical radius {r2} does not reproduce R2={geom.R2}")

    # closed form of Z in x and u
    s = geom.x + 0.5 * geom.x ** 2 * geom.u
    mu_closed = math.log1p(s + math.sqrt(s * (2 + s)))
    if abs((mu_p + mu_m) - mu_closed) > GEOMETRY_RTOL * max(1.0, mu_closed):
        raise GeometryError(f"mu={mu_p + mu_m} disagrees with closed form {mu_closed}")

    return BisphericalGeometry(b=b, mu_plus=mu_p, mu_minus=-mu_m, spheres=geom,
                               dmu_plus=(mu_p1, mu_p2), dmu_minus=(mu_m1, mu_m2))


def _closed_series(mu: float, l_start: int, weight, kT: float) -> Tuple[float, float, float, int]:
    """(kT/2) sum w_l ln(1 - e^{-(2l+1) mu}) and its first two mu-derivatives"""
    l_cut = min(l_start + math.ceil(40.0 / (2 * mu)) + 20, 10_000_000)
    l = np.arange(l_start, l_cut + 1, dtype=float)
    w = weight(l)
    s = (2 * l + 1) * mu
    with np.errstate(over="ignore"):
        em1 = np.expm1(s)
        energy = np.sum(w * np.log1p(-np.exp(-s)))
        e_mu = np.sum(w * (2 * l + 1) / em1)
        e_mumu = -np.sum(w * (2 * l + 1) ** 2 / (em1 * -np.expm1(-s)))
    half = 0.5 * kT
    return half * energy, half * e_mu, half * e_mumu, l_cut


def _series_result(bg: BisphericalGeometry, temperature: float, l_start: int,
                   weight) -> ClassicalResult:
    energy, e_mu, e_mumu, l_cut = _closed_series(bg.mu, l_start, weight, K_B * temperature)
    mu1, mu2 = bg.dmu
    force = -e_mu * mu1
    gradient = -(e_mumu * mu1 ** 2 + e_mu * mu2)
    return ClassicalResult(energy=energy, force=force, gradient=gradient,
                           l_max=l_cut, m_max=l_cut)


def dirichlet_classical(bg: BisphericalGeometry, temperature: float) -> ClassicalResult:
    """Grounded spheres: (kT/2) sum (2l+1) ln(1 - Z^{2l+1})"""
    return _series_result(bg, temperature, 0, lambda l: 2 * l + 1)


def _drude_t0(z: float, l: np.ndarray) -> np.ndarray:
    """m = 0 Drude T-matrix of one sphere in the monopole-free basis"""
    diag = z ** (2 * l + 1)
    column = (1 - z * z) * (1 - z ** (2 * l))
    return diag[:, None] * (np.eye(len(l)) + column[None, :])


def _drude_m0_energy(bg: BisphericalGeometry, kT: float, l_max: int) -> float:
    l = np.arange(1, l_max + 1, dtype=float)
    n0 = _drude_t0(bg.Z_minus, l) @ _drude_t0(bg.Z_plus, l)
    return 0.5 * kT * logdet_one_minus(n0)


def drude_isolated_classical(bg: BisphericalGeometry, temperature: float,
                             l_max: Optional[int] = None) -> ClassicalResult:
    """Isolated Drude spheres: m != 0 closed form plus the m = 0 determinant"""
    if l_max is None:
        l_max = default_l_max(bg.spheres)
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    kT = K_B * temperature
    geom = bg.spheres

    rest = _series_result(bg, temperature, 1, lambda l: 2 * l)

    def m0_energy(a: float) -> float:
        return _drude_m0_energy(bispherical_from_spheres(geom.with_gap(a)), kT, l_max)

    energy0 = _drude_m0_energy(bg, kT, l_max)
    deriv = richardson_derivatives(m0_energy, geom.a, FD_STEP * geom.a)
    m0 = ClassicalResult(energy=energy0, force=-deriv.first, gradient=-deriv.second,
                         l_max=l_max, m_max=0, derivative_error=deriv.first_error)
    total = rest + m0
    total.l_max = l_max
    total.parts = {"m0": m0, "m_nonzero": rest}
    return total


def sphere_plate_drude_exact(Z: float, temperature: float, l_max: Optional[int] = None) -> float:
    """Isolated Drude sphere in front of a plate, closed form

    l_max, when given, truncates the m = 0 block only, matching a determinant
    evaluated with l in [1, l_max].
    """
    if not 0 < Z < 1:
        raise ValueError(f"Z must lie in (0, 1), got {Z}")
    kT = K_B * temperature
    mu = -math.log(Z)
    rest, _, _, l_cut = _closed_series(mu, 1, lambda l: 2 * l, kT)

    top = l_cut if l_max is None else l_max
    l = np.arange(1, top + 1, dtype=float)
    z_odd = Z ** (2 * l + 1)
    diagonal = np.sum(np.log1p(-z_odd))
    column = (1 - Z * Z) * np.sum(z_odd * (1 - Z ** (2 * l)) / (1 - z_odd))
    return rest + 0.5 * kT * (diagonal + math.log1p(-column))


def _neumann_sphere(mu: float, p: int, m: int, l_max: int,
                    order: int) -> Tuple[np.ndarray, ...]:
    """Neumann T-matrix of one sphere and its mu-derivatives up to `order`

    p = +1 for the sphere at mu_+ > 0, p = -1 for the one at mu_- <= 0.
    """
    l = np.arange(m, l_max + 1, dtype=float)
    n = len(l)
    ch, sh = math.cosh(mu), math.sinh(mu)
    banded = np.zeros((3, n))
    banded[0, 1:] = -(l[:-1] + 1 + m)
    banded[1] = (2 * l + 1) * ch + p * sh
    banded[2, :-1] = -(l[1:] - m)
    eye = np.eye(n)

    delta = solve_banded((1, 1), banded, -2 * p * sh * eye)
    k = l + 0.5
    scale = np.exp(-p * mu * k)
    sigma = -p

    def conj(mat):
        return -(scale[:, None] * mat * scale[None, :])

    def commute(mat):
        return sigma * (k[:, None] * mat + mat * k[None, :])

    x0 = eye + delta
    out = [conj(x0)]
    if order >= 1:
        b1 = (2 * l + 1) * sh + p * ch
        x1 = solve_banded((1, 1), banded, -2 * p * ch * eye - b1[:, None] * delta)
        y = commute(x0) + x1
        out.append(conj(y))
        if order >= 2:
            b2 = banded[1]
            x2 = solve_banded((1, 1), banded,
                              -2 * p * sh * eye - 2 * b1[:, None] * x1 - b2[:, None] * delta)
            y1 = commute(x1) + x2
            out.append(conj(commute(y) + y1))
    return tuple(out)


def _neumann_plate(m: int, l_max: int) -> Tuple[np.ndarray, ...]:
    """Plate at mu = 0, where B is singular: T = -1"""
    size = l_max - m + 1
    return -np.eye(size), np.zeros((size, size)), np.zeros((size, size))


def _neumann_m_term(bg: BisphericalGeometry, m: int, l_max: int,
                    with_derivatives: bool) -> Tuple[float, float, float]:
    """ln det(1 - N_m) and its first two derivatives in a"""
    order = 2 if with_derivatives else 0
    plus = _neumann_sphere(bg.mu_plus, 1, m, l_max, order)
    minus = (_neumann_plate(m, l_max) if bg.spheres.is_sphere_plate
             else _neumann_sphere(bg.mu_minus, -1, m, l_max, order))
    n_m = minus[0] @ plus[0]
    logdet = logdet_one_minus(n_m)
    if not with_derivatives:
        return logdet, 0.0, 0.0

    p1, p2 = bg.dmu_plus
    q1, q2 = -bg.dmu_minus[0], -bg.dmu_minus[1]
    tp_a = plus[1] * p1
    tp_aa = plus[2] * p1 ** 2 + plus[1] * p2
    tm_a = minus[1] * q1
    tm_aa = minus[2] * q1 ** 2 + minus[1] * q2

    dn = tm_a @ plus[0] + minus[0] @ tp_a
    d2n = tm_aa @ plus[0] + 2 * tm_a @ tp_a + minus[0] @ tp_aa
    lu = lu_factor(np.eye(n_m.shape[0]) - n_m)
    g_dn = lu_solve(lu, dn)
    g_d2n = lu_solve(lu, d2n)
    first = -np.trace(g_dn)
    second = -np.trace(g_d2n) - np.sum(g_dn * g_dn.T)
    return logdet, float(first), float(second)


def _neumann_sum(bg: BisphericalGeometry, kT: float, l_max: int, m_max: Optional[int],
                 with_derivatives: bool, include_monopole: bool) -> Tuple[np.ndarray, int]:
    totals = np.zeros(3)
    small_run = 0
    m_last = l_max if m_max is None else min(m_max, l_max)
    m = 0
    for m in range(0, m_last + 1):
        weight = 0.5 if m == 0 else 1.0
        if m == 0 and not include_monopole:
            terms = _neumann_m_term_without_monopole(bg, l_max, with_derivatives)
        else:
            terms = _neumann_m_term(bg, m, l_max, with_derivatives)
        term = kT * weight * np.array(terms)
        totals += term
        logger.debug(f"Neumann m={m}: ln det term {term[0]:.6e}")
        if m_max is None and m > 0:
            small_run = small_run + 1 if abs(term[0]) < M_TOLERANCE * abs(totals[0]) else 0
            if small_run >= M_SMALL_TERMS_TO_STOP:
                break
    return totals, m


def _neumann_m_term_without_monopole(bg: BisphericalGeometry, l_max: int,
                                     with_derivatives: bool) -> Tuple[float, float, float]:
    """m = 0 term with the l = 0 row and column removed"""
    if with_derivatives:
        raise ValueError("analytic derivatives need the full m = 0 block")
    plus = _neumann_sphere(bg.mu_plus, 1, 0, l_max, 0)[0][1:, 1:]
    minus = (_neumann_plate(0, l_max) if bg.spheres.is_sphere_plate
             else _neumann_sphere(bg.mu_minus, -1, 0, l_max, 0))[0][1:, 1:]
    return logdet_one_minus(minus @ plus), 0.0, 0.0


def neumann_classical(bg: BisphericalGeometry, temperature: float,
                      l_max: Optional[int] = None, m_max: Optional[int] = None,
                      derivatives: str = "analytic",
                      include_monopole: bool = True) -> ClassicalResult:
    """Perfect-conductor TE (Neumann) classical term

    With m_max None the m sum stops after two consecutive negligible terms.
    derivatives="fd" uses Richardson differences of the energy instead of
    the differentiated linear systems.
    """
    if l_max is None:
        l_max = default_l_max(bg.spheres)
    if derivatives not in ("analytic", "fd"):
        raise ValueError(f"unknown derivative mode: {derivatives}")
    kT = K_B * temperature
    analytic = derivatives == "analytic" and include_monopole

    totals, m_used = _neumann_sum(bg, kT, l_max, m_max, analytic, include_monopole)
    if analytic:
        return ClassicalResult(energy=totals[0], force=-totals[1], gradient=-totals[2],
                               l_max=l_max, m_max=m_used)

    geom = bg.spheres

    def energy_at(a: float) -> float:
        shifted = bispherical_from_spheres(geom.with_gap(a))
        return _neumann_sum(shifted, kT, l_max, m_used, False, include_monopole)[0][0]

    deriv = richardson_derivatives(energy_at, geom.a, FD_STEP * geom.a)
    return ClassicalResult(energy=totals[0], force=-deriv.first, gradient=-deriv.second,
                           l_max=l_max, m_max=m_used, derivative_error=deriv.first_error)


def pc_classical(bg: BisphericalGeometry, temperature: float, boundary: str = "grounded",
                 l_max: Optional[int] = None) -> ClassicalResult:
    """Perfect conductor: TM (Dirichlet or isolated Drude) plus TE (Neumann)"""
    tm = tm_classical(bg, temperature, boundary, l_max)
    te = neumann_classical(bg, temperature, l_max)
    total = tm + te
    total.parts = {"TM": tm, "TE": te}
    return total


def tm_classical(bg: BisphericalGeometry, temperature: float, boundary: str,
                 l_max: Optional[int] = None) -> ClassicalResult:
    """Zero-frequency TM term shared by every metal model"""
    if boundary == "grounded":
        return dirichlet_classical(bg, temperature)
    if boundary == "isolated":
        return drude_isolated_classical(bg, temperature, l_max)
    raise ValueError(f"boundary must be 'grounded' or 'isolated', got '{boundary}'")


def asymptotic_drude(geom: SphereGeometry, temperature: float, boundary: str,
                     regime: str) -> float:
    """Asymptotic zero-frequency Drude force in eV/um"""
    kT = K_B * temperature
    if regime == "near":
        if geom.x >= 0.05:
            raise RangeError(f"near-field law needs a/R < 0.05, got {geom.x:.4f}")
        z3 = float(zeta(3))
        return -kT * z3 * geom.reduced_radius / (8 * geom.a ** 2) * (1 + geom.x / (6 * z3))
    if regime == "far":
        if geom.is_sphere_plate or geom.a <= 10 * (geom.R1 + geom.R2):
            raise RangeError("far-field law needs two spheres with a > 10 (R1 + R2)")
        if boundary == "grounded":
            return -kT * geom.R1 * geom.R2 / geom.a ** 3
        if boundary == "isolated":
            return -18 * kT * geom.R1 ** 3 * geom.R2 ** 3 / geom.a ** 7
        raise ValueError(f"boundary must be 'grounded' or 'isolated', got '{boundary}'")
    raise ValueError(f"regime must be 'near' or 'far', got '{regime}'")
