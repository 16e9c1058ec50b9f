"""
Derivative-expansion coefficients for the positive Matsubara modes of gold
Drude and plasma prescriptions, T = 300 K, separations 0.10 - 2.0 um.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from errors import RangeError

SEPARATIONS_UM = (
    0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65,
    0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0,
)

COLUMNS = ("theta", "kappa", "theta_tilde", "kappa_tilde")

# per prescription: theta, kappa, theta_tilde, kappa_tilde at SEPARATIONS_UM
COEFFICIENTS: Dict[str, Dict[str, Tuple[float, ...]]] = {
    "drude": {
        "theta": (
            0.717, 0.694, 0.664, 0.636, 0.609, 0.584, 0.561, 0.540, 0.520, 0.502, 0.484, 0.468,
            0.453, 0.439, 0.425, 0.412, 0.400, 0.389, 0.378, 0.340, 0.307, 0.279, 0.256, 0.237,
        ),
        "kappa": (
            0.440, 0.471, 0.496, 0.515, 0.532, 0.546, 0.559, 0.571, 0.583, 0.593, 0.603, 0.613,
            0.622, 0.630, 0.639, 0.647, 0.655, 0.662, 0.669, 0.696, 0.719, 0.739, 0.757, 0.774,
        ),
        "theta_tilde": (
            0.456, 0.4715, 0.470, 0.463, 0.454, 0.4445, 0.435, 0.425, 0.415, 0.4055, 0.396, 0.387,
            0.379, 0.370, 0.362, 0.3545, 0.347, 0.3395, 0.332, 0.306, 0.282, 0.261, 0.242, 0.225,
        ),
        "kappa_tilde": (
            0.245, 0.270, 0.289, 0.305, 0.319, 0.331, 0.342, 0.353, 0.362, 0.371, 0.380, 0.389,
            0.397, 0.405, 0.413, 0.421, 0.429, 0.437, 0.444, 0.474, 0.502, 0.529, 0.554, 0.578,
        ),
    },
    "plasma": {
        "theta": (
            0.725, 0.700, 0.670, 0.639, 0.612, 0.586, 0.563, 0.541, 0.521, 0.503, 0.486, 0.469,
            0.454, 0.440, 0.426, 0.413, 0.401, 0.389, 0.378, 0.339, 0.307, 0.279, 0.256, 0.236,
        ),
        # 0.712 at 1.4 um kept as printed; neighbours suggest 0.718
        "kappa": (
            0.440, 0.472, 0.496, 0.515, 0.532, 0.547, 0.560, 0.572, 0.583, 0.594, 0.604, 0.613,
            0.622, 0.631, 0.639, 0.647, 0.655, 0.662, 0.670, 0.696, 0.712, 0.739, 0.758, 0.774,
        ),
        "theta_tilde": (
            0.463, 0.477, 0.475, 0.467, 0.458, 0.447, 0.437, 0.427, 0.417, 0.407, 0.398, 0.389,
            0.380, 0.371, 0.363, 0.355, 0.348, 0.340, 0.333, 0.306, 0.282, 0.261, 0.242, 0.225,
        ),
        "kappa_tilde": (
            0.244, 0.269, 0.289, 0.306, 0.319, 0.332, 0.343, 0.352, 0.363, 0.372, 0.380, 0.389,
            0.397, 0.406, 0.413, 0.421, 0.430, 0.437, 0.444, 0.474, 0.502, 0.529, 0.554, 0.578,
        ),
    },
}

DEFAULT_CSV = Path(__file__).resolve().parent / "data" / "de_tables.csv"
CSV_HEADER = ("prescription", "a_um") + COLUMNS


@dataclass(frozen=True)
class DeTable:
    """One prescription's coefficient table with monotone cubic interpolation"""
    prescription: str
    separations: Tuple[float, ...]
    values: Dict[str, Tuple[float, ...]]

    @property
    def a_min(self) -> float:
        return self.separations[0]

    @property
    def a_max(self) -> float:
        return self.separations[-1]

    def lookup(self, a: float) -> Dict[str, float]:
        """All four coefficients at separation a (um)"""
        slack = 1e-12
        if not (self.a_min - slack <= a <= self.a_max + slack):
            raise RangeError(
                f"a={a} um outside derivative-expansion table range "
                f"[{self.a_min}, {self.a_max}] um ({self.prescription})")
        a = min(max(a, self.a_min), self.a_max)
        return {name: float(_interpolators(self.prescription)[name](a)) for name in COLUMNS}

    def rows(self) -> List[Tuple[float, float, float, float, float]]:
        return [(a,) + tuple(self.values[c][i] for c in COLUMNS)
                for i, a in enumerate(self.separations)]


_INTERPOLATORS: Dict[str, Dict[str, PchipInterpolator]] = {}


def _interpolators(prescription: str) -> Dict[str, PchipInterpolator]:
    if prescription not in _INTERPOLATORS:
        grid = np.array(SEPARATIONS_UM)
        _INTERPOLATORS[prescription] = {
            name: PchipInterpolator(grid, np.array(COEFFICIENTS[prescription][name]),
                                    extrapolate=False)
            for name in COLUMNS
        }
    return _INTERPOLATORS[prescription]


def get_table(prescription: str) -> DeTable:
    key = prescription.lower()
    if key not in COEFFICIENTS:
        raise ValueError(f"no derivative-expansion table for prescription '{prescription}'")
    return DeTable(prescription=key, separations=SEPARATIONS_UM, values=COEFFICIENTS[key])


def tables_as_rows() -> List[Dict[str, Union[str, float]]]:
    """Flat rows (prescription, a_um, theta, kappa, theta_tilde, kappa_tilde)"""
    rows = []
    for prescription in COEFFICIENTS:
        for row in get_table(prescription).rows():
            rows.append(dict(zip(CSV_HEADER, (prescription,) + row)))
    return rows


def export_tables_csv(path: Union[str, Path] = DEFAULT_CSV) -> Path:
    """Write the embedded tables to CSV for audit"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(tables_as_rows())
    return path


def read_tables_csv(path: Union[str, Path] = DEFAULT_CSV) -> List[Dict[str, Union[str, float]]]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        return [{k: (v if k == "prescription" else float(v)) for k, v in row.items()}
                for row in csv.DictReader(f)]
