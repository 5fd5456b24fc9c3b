"""Detector-side field estimate for a thermally prepolarized NMR sample.

Order-of-magnitude tool: the sample is treated as an on-axis point dipole at
its center, with the spin-1/2 thermal polarization ``tanh(hbar*gamma*B /
(2*kB*T))``. For spins above 1/2 the same form is used with the isotope's
gyromagnetic ratio, which is a deliberate simplification.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .constants import HBAR, K_BOLTZMANN, MU0
from .errors import GeometryError, InvalidParameterError

DATA_DIR_ENV = "SERFKIT_DATA_DIR"


@dataclass(frozen=True)
class SampleSpec:
    """Thermally prepolarized sample and detection geometry."""

    volume_m3: float
    spin_density_per_m3: float
    natural_abundance: float
    gyromag_rad_s_t: float
    spin: float
    prepol_field_t: float
    temperature_k: float
    distance_m: float

    def __post_init__(self):
        positive = {
            "volume_m3": self.volume_m3,
            "spin_density_per_m3": self.spin_density_per_m3,
            "gyromag_rad_s_t": abs(self.gyromag_rad_s_t),
            "spin": self.spin,
            "prepol_field_t": self.prepol_field_t,
            "temperature_k": self.temperature_k,
            "distance_m": self.distance_m,
        }
        for name, value in positive.items():
            if not value > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if not 0.0 < self.natural_abundance <= 1.0:
            raise InvalidParameterError("natural_abundance must be in (0, 1]")

    @property
    def equivalent_radius_m(self) -> float:
        """Radius of a sphere with the sample volume."""
        return (3.0 * self.volume_m3 / (4.0 * np.pi)) ** (1.0 / 3.0)


@dataclass(frozen=True)
class Isotope:
    symbol: str
    gyromag_rad_s_t: float
    spin: float
    natural_abundance: float


def thermal_polarization(
    gyromag_rad_s_t: float, prepol_field_t: float, temperature_k: float
) -> float:
    """Spin-1/2 thermal polarization ``tanh(hbar*gamma*B / (2*kB*T))``.

    Odd in the field sign, saturating below 1 in magnitude, and linear for
    small arguments.
    """
    if not temperature_k > 0:
        raise InvalidParameterError("temperature_k must be positive")
    pol = np.tanh(HBAR * gyromag_rad_s_t * prepol_field_t / (2.0 * K_BOLTZMANN * temperature_k))
    # float64 rounds tanh to +-1 for arguments beyond ~19; keep |P| < 1.
    cap = np.nextafter(1.0, 0.0)
    return float(np.clip(pol, -cap, cap))


def dipole_field(spec: SampleSpec) -> float:
    """On-axis point-dipole field at the detector, in tesla.

    The magnetic moment is ``N * abundance * P * (hbar * gamma / 2)`` and
    the field ``(mu0 / 4 pi) * 2 m / d^3``. Scales inverse-cube with
    distance and linearly with volume, abundance, and (in the linear
    regime) the prepolarization field.

    Raises
    ------
    GeometryError
        Detector distance inside the equivalent sample radius, where the
        point-dipole picture breaks down.
    """
    if spec.distance_m <= spec.equivalent_radius_m:
        raise GeometryError(
            f"distance {spec.distance_m:g} m inside the sample radius "
            f"{spec.equivalent_radius_m:g} m"
        )
    pol = thermal_polarization(spec.gyromag_rad_s_t, spec.prepol_field_t, spec.temperature_k)
    n_spins = spec.volume_m3 * spec.spin_density_per_m3
    moment = n_spins * spec.natural_abundance * pol * (HBAR * spec.gyromag_rad_s_t / 2.0)
    return float(MU0 / (4.0 * np.pi) * 2.0 * moment / spec.distance_m**3)


def data_dir_path():
    """Bundled data directory, overridable through SERFKIT_DATA_DIR."""
    override = os.environ.get(DATA_DIR_ENV)
    if override:
        return override
    return resources.files("serfkit").joinpath("data")


def load_isotopes(path=None) -> dict[str, Isotope]:
    """Load the bundled isotope table (gamma, spin, natural abundance)."""
    if path is None:
        source = data_dir_path()
        if isinstance(source, str):
            with open(os.path.join(source, "isotopes.json"), encoding="utf-8") as fh:
                raw = json.load(fh)
        else:
            raw = json.loads(source.joinpath("isotopes.json").read_text(encoding="utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    table = {}
    for symbol, entry in raw["isotopes"].items():
        table[symbol] = Isotope(
            symbol=symbol,
            gyromag_rad_s_t=entry["gyromag_rad_s_t"],
            spin=entry["spin"],
            natural_abundance=entry["natural_abundance"],
        )
    return table


def water_proton_sample(
    volume_m3: float = 200e-9,
    prepol_field_t: float = 2.0,
    temperature_k: float = 300.0,
    distance_m: float = 0.01,
) -> SampleSpec:
    """Reference sample: protons in liquid water (6.7e28 m^-3)."""
    isotope = load_isotopes()["1H"]
    return SampleSpec(
        volume_m3=volume_m3,
        spin_density_per_m3=6.7e28,
        natural_abundance=isotope.natural_abundance,
        gyromag_rad_s_t=isotope.gyromag_rad_s_t,
        spin=isotope.spin,
        prepol_field_t=prepol_field_t,
        temperature_k=temperature_k,
        distance_m=distance_m,
    )
