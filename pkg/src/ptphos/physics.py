"""Physical constants and unit conversions for radiative decay rates.

The radiative rate constant of a spin-forbidden emission follows
k_r = 2*pi*nu^2*e^2 / (eps0*m_e*c^3) * f, with nu the emission frequency in
Hz and f the dimensionless oscillator strength. All conversions assume
vacuum wavelengths; medium corrections are left to downstream models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveError

# CODATA 2022 values (SI units).
ELEMENTARY_CHARGE_C = 1.602176634e-19      # exact
VACUUM_PERMITTIVITY_F_PER_M = 8.8541878188e-12
ELECTRON_MASS_KG = 9.1093837139e-31
SPEED_OF_LIGHT_M_PER_S = 299792458.0       # exact

_KR_PREFACTOR = (
    2.0 * math.pi * ELEMENTARY_CHARGE_C**2
    / (VACUUM_PERMITTIVITY_F_PER_M * ELECTRON_MASS_KG * SPEED_OF_LIGHT_M_PER_S**3)
)


def wavelength_to_frequency(wavelength_nm: float) -> float:
    """Convert a vacuum wavelength in nm to a frequency in Hz."""
    if not wavelength_nm > 0:
        raise NonPositiveError(f"wavelength must be positive, got {wavelength_nm}")
    return SPEED_OF_LIGHT_M_PER_S / (wavelength_nm * 1e-9)


def frequency_to_wavelength(frequency_hz: float) -> float:
    """Convert a frequency in Hz to a vacuum wavelength in nm."""
    if not frequency_hz > 0:
        raise NonPositiveError(f"frequency must be positive, got {frequency_hz}")
    return SPEED_OF_LIGHT_M_PER_S / frequency_hz * 1e9


def log10_rate(kr_per_s: float) -> float:
    if not kr_per_s > 0:
        raise NonPositiveError(f"rate must be positive, got {kr_per_s}")
    return math.log10(kr_per_s)


def rate_from_log10(log10_kr: float) -> float:
    return 10.0 ** log10_kr


@dataclass(frozen=True)
class TransitionRecord:
    """An emissive transition, stored canonically as (frequency, oscillator strength)."""

    frequency_hz: float
    oscillator_strength: float

    def __post_init__(self) -> None:
        if not self.frequency_hz > 0:
            raise NonPositiveError(f"frequency must be positive, got {self.frequency_hz}")
        if self.oscillator_strength < 0:
            raise NonPositiveError(
                f"oscillator strength must be >= 0, got {self.oscillator_strength}"
            )

    @classmethod
    def from_wavelength(cls, wavelength_nm: float, oscillator_strength: float) -> "TransitionRecord":
        return cls(wavelength_to_frequency(wavelength_nm), oscillator_strength)

    @property
    def wavelength_nm(self) -> float:
        return frequency_to_wavelength(self.frequency_hz)


def kr_from_transition(transition: TransitionRecord) -> float:
    """Radiative decay rate constant in s^-1 for the given transition."""
    return _KR_PREFACTOR * transition.frequency_hz**2 * transition.oscillator_strength
