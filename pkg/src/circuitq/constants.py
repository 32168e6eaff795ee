"""Physical constants (2019 SI exact values where defined)."""

from dataclasses import dataclass
from math import pi


@dataclass(frozen=True)
class PhysicalConstants:
    """Electron charge, Planck constant and derived flux quanta.

    ``phi0`` is the reduced flux quantum hbar/2e; the identity is exact
    by construction.
    """

    e: float = 1.602176634e-19
    h: float = 6.62607015e-34

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * pi)

    @property
    def phi0(self) -> float:
        return self.hbar / (2.0 * self.e)


CONSTANTS = PhysicalConstants()

E = CONSTANTS.e
H = CONSTANTS.h
HBAR = CONSTANTS.hbar
PHI0 = CONSTANTS.phi0
