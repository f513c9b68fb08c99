"""Photonic-condensate parameters and conversion to healing-length units.

Everything outside this module works with lengths measured in healing
lengths ``xi = hbar / (m c)`` and speeds measured in the sound speed
``c = sqrt(g n0 / m)``.  The interaction strength is supplied in its
dimensionless 2D form ``g_tilde = m g / hbar**2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError

HBAR = 1.054571817e-34  # J s (CODATA 2018, exact in the SI)

# Typical dye-cavity photon condensate (Klaers et al. 2010).
DEFAULT_PHOTON_MASS = 6.7e-36  # kg
DEFAULT_G_TILDE = 7e-4
DEFAULT_DENSITY = 1e13  # m^-2

PARAM_KEYS = ("photon_mass_kg", "g_tilde", "density_per_m2")


@dataclass(frozen=True)
class PhysicalParams:
    photon_mass: float = DEFAULT_PHOTON_MASS
    interaction_dimensionless: float = DEFAULT_G_TILDE
    density: float = DEFAULT_DENSITY
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("photon_mass", "interaction_dimensionless", "density", "hbar"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")

    @classmethod
    def from_mapping(cls, doc: dict) -> "PhysicalParams":
        """Build from a document using the ``photon_mass_kg``/``g_tilde``/``density_per_m2`` keys.

        Missing keys fall back to the default condensate; unknown keys are rejected.
        """
        unknown = set(doc) - set(PARAM_KEYS)
        if unknown:
            raise DomainError(f"unknown parameter key(s): {', '.join(sorted(unknown))}")
        values = {}
        for key, field in zip(PARAM_KEYS, ("photon_mass", "interaction_dimensionless", "density")):
            if key not in doc:
                continue
            value = doc[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise DomainError(f"{key} must be a number, got {value!r}")
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{key} must be a positive finite number, got {value!r}")
            values[field] = float(value)
        return cls(**values)

    def to_mapping(self) -> dict:
        return {
            "photon_mass_kg": self.photon_mass,
            "g_tilde": self.interaction_dimensionless,
            "density_per_m2": self.density,
        }


def load_physical_params(path) -> PhysicalParams:
    """Read a JSON parameter document from ``path``."""
    with Path(path).open(encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise DomainError("parameter document must be a JSON object")
    return PhysicalParams.from_mapping(doc)


@dataclass(frozen=True)
class DerivedScales:
    sound_speed: float  # m/s
    healing_length: float  # m
    interaction_si: float  # J m^2


def derive_scales(p: PhysicalParams) -> DerivedScales:
    """Sound speed, healing length and SI interaction strength of a condensate."""
    g = p.interaction_dimensionless * p.hbar**2 / p.photon_mass
    c = math.sqrt(g * p.density / p.photon_mass)
    xi = p.hbar / (p.photon_mass * c)
    return DerivedScales(sound_speed=c, healing_length=xi, interaction_si=g)


def _check_scales(s: DerivedScales):
    if not (s.healing_length > 0 and math.isfinite(s.healing_length)):
        raise DomainError(f"healing_length must be positive and finite, got {s.healing_length!r}")


def to_dimensionless(length_si: float, s: DerivedScales) -> float:
    _check_scales(s)
    return length_si / s.healing_length


def to_physical(length_dimensionless: float, s: DerivedScales) -> float:
    _check_scales(s)
    return length_dimensionless * s.healing_length
