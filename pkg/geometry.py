"""
Sphere-sphere geometry and the truncation plan shared by the classical solvers
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

SPHERE_PLATE = math.inf


@dataclass(frozen=True)
class SphereGeometry:
    """Two spheres of radii R1, R2 (um) at closest distance a (um); R2 = inf is a plate"""
    R1: float
    R2: float
    a: float

    def __post_init__(self):
        if not (self.R1 > 0 and self.R2 > 0 and self.a > 0):
            raise ValueError(f"radii and gap must be positive: R1={self.R1}, R2={self.R2}, a={self.a}")
        if math.isinf(self.R1):
            raise ValueError("only the second body may be a plate")

    @property
    def is_sphere_plate(self) -> bool:
        return math.isinf(self.R2)

    @property
    def reduced_radius(self) -> float:
        if self.is_sphere_plate:
            return self.R1
        return self.R1 * self.R2 / (self.R1 + self.R2)

    @property
    def u(self) -> float:
        if self.is_sphere_plate:
            return 0.0
        return self.R1 * self.R2 / (self.R1 + self.R2) ** 2

    @property
    def x(self) -> float:
        return self.a / self.reduced_radius

    @property
    def center_distance(self) -> float:
        return self.R1 + self.R2 + self.a

    def with_gap(self, a: float) -> "SphereGeometry":
        return replace(self, a=a)


@dataclass(frozen=True)
class TruncationPlan:
    """Multipole truncation and decimation for the zero-frequency solvers"""
    N1: int
    N2: int
    m_max: int
    delta1: float
    delta2: float
    strip_factor: float
    p1: int = 1
    p2: int = 1
    l_max_bispherical: int = 0
    m_tolerance: float = 1e-8

    @property
    def n1(self) -> int:
        return self.N1 // self.p1

    @property
    def n2(self) -> int:
        return self.N2 // self.p2

    @property
    def decimated(self) -> bool:
        return self.p1 > 1 or self.p2 > 1

    def with_blocks(self, p1: int, p2: int) -> "TruncationPlan":
        """Same truncation with new block sizes, dimensions padded to multiples"""
        return replace(self, p1=p1, p2=p2,
                       N1=_pad(self.N1, p1), N2=_pad(self.N2, p2))

    @classmethod
    def for_geometry(cls, geom: SphereGeometry, l_factor: float = 6.0, m_factor: float = 6.0,
                     strip_factor: float = 6.0,
                     decimation: Union[str, None, Tuple[int, int]] = "auto",
                     auto_threshold: int = 400, max_block: int = 10,
                     l_max_bispherical: Optional[int] = None,
                     m_tolerance: float = 1e-8) -> "TruncationPlan":
        """Plan with N_i = ceil(l_factor R_i / a) and m_max = ceil(sqrt(m_factor R/a))"""
        a, r_eff = geom.a, geom.reduced_radius
        N1 = math.ceil(l_factor * geom.R1 / a)
        N2 = math.ceil(l_factor * geom.R2 / a) if not geom.is_sphere_plate else N1
        delta1 = geom.R1 / math.sqrt(r_eff * a)
        delta2 = geom.R2 / math.sqrt(r_eff * a) if not geom.is_sphere_plate else math.inf
        m_max = math.ceil(math.sqrt(m_factor * r_eff / a))
        if l_max_bispherical is None:
            l_max_bispherical = default_l_max(geom)

        p1 = p2 = 1
        if decimation == "auto":
            if N1 > auto_threshold:
                p1 = max(1, min(max_block, int(delta1 // 8)))
                p2 = max(1, min(max_block, int(delta2 // 8))) if math.isfinite(delta2) else 1
        elif decimation is not None:
            p1, p2 = (int(p) for p in decimation)
            if p1 < 1 or p2 < 1:
                raise ValueError(f"block sizes must be >= 1, got {decimation}")

        return cls(N1=_pad(N1, p1), N2=_pad(N2, p2), m_max=m_max, delta1=delta1,
                   delta2=delta2, strip_factor=strip_factor, p1=p1, p2=p2,
                   l_max_bispherical=l_max_bispherical, m_tolerance=m_tolerance)


def default_l_max(geom: SphereGeometry) -> int:
    """Bispherical truncation ceil(12 sqrt(R/a)) + 8"""
    return math.ceil(12.0 * math.sqrt(geom.reduced_radius / geom.a)) + 8


def _pad(n: int, p: int) -> int:
    return -(-n // p) * p
