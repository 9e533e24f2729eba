"""Zero-temperature Fermi level, subband populations and allowed transitions.

Each subband carries a constant 2D density of states

    rho_2D = g_s * m_star / (2 pi hbar^2)   per unit area per energy,

with g_s the spin degeneracy factor. The default is g_s = 1, which reproduces
the reference densities for the GaAs structures this package targets (with
g_s = 2 every collective coupling picks up a factor sqrt(2) and the quoted
doping densities double). Set spin_degeneracy on the OccupancySpec to change
the convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import HBAR2_OVER_2ME, PER_NM2_TO_PER_CM2
from .structure import SubbandBasis


class OccupancyError(ValueError):
    """Inconsistent occupancy specification or exhausted basis."""


@dataclass(frozen=True)
class OccupancySpec:
    """Either a fixed areal density or a Fermi level pinned to a subband edge.

    mode: "density" (n_e given, E_F solved) or "pinned" (E_F = E_{j_pin},
    n_e returned). surface is the transverse area S in nm^2.
    """

    mode: str
    n_e: float | None = None       # nm^-2, density mode
    j_pin: int | None = None       # 1-based subband index, pinned mode
    surface: float = 1.0e6         # nm^2
    spin_degeneracy: float = 1.0

    def __post_init__(self):
        if self.mode not in ("density", "pinned"):
            raise OccupancyError(f"unknown occupancy mode {self.mode!r}")
        if self.surface <= 0 or not math.isfinite(self.surface):
            raise OccupancyError(f"surface must be positive, got {self.surface}")
        if self.spin_degeneracy <= 0:
            raise OccupancyError("spin_degeneracy must be positive")
        if self.mode == "density":
            if self.n_e is None or self.n_e <= 0:
                raise OccupancyError(f"density mode needs n_e > 0, got {self.n_e}")
        else:
            if self.j_pin is None or self.j_pin < 2:
                raise OccupancyError(f"pinned mode needs j_pin >= 2, got {self.j_pin}")

    @classmethod
    def density(cls, n_e_per_cm2, surface=1.0e6, spin_degeneracy=1.0):
        return cls(mode="density", n_e=n_e_per_cm2 / PER_NM2_TO_PER_CM2,
                   surface=surface, spin_degeneracy=spin_degeneracy)

    @classmethod
    def pinned(cls, j_pin, surface=1.0e6, spin_degeneracy=1.0):
        return cls(mode="pinned", j_pin=j_pin, surface=surface,
                   spin_degeneracy=spin_degeneracy)


@dataclass(frozen=True)
class SubbandPopulations:
    """Fermi level (meV), per-subband occupation numbers and areal densities."""

    E_F: float
    j_F: int                 # highest occupied subband, 1-based
    N: np.ndarray            # occupation numbers per subband
    n: np.ndarray            # areal densities N_j / S, nm^-2
    n_e: float               # total areal density, nm^-2
    surface: float           # nm^2
    rho: float               # 2D DOS per subband, nm^-2 meV^-1
    spin_degeneracy: float

    @property
    def n_e_per_cm2(self) -> float:
        return self.n_e * PER_NM2_TO_PER_CM2

    @property
    def N_total(self) -> float:
        return float(self.N.sum())


def density_of_states(m_star, spin_degeneracy=1.0) -> float:
    """2D DOS per subband, nm^-2 meV^-1: g_s m_star / (2 pi hbar^2)."""
    return spin_degeneracy * m_star / (4.0 * math.pi * HBAR2_OVER_2ME)


def fermi_level(basis: SubbandBasis, spec: OccupancySpec) -> SubbandPopulations:
    """Resolve E_F and the subband populations for the given spec.

    Density mode inverts the piecewise-linear relation
    n_e = rho * sum_j (E_F - E_j) theta(E_F - E_j) exactly, segment by segment.
    Pinned mode sets E_F = E_{j_pin} and returns the implied n_e. A subband
    exactly at E_F holds zero electrons.
    """
    E = basis.energies
    rho = density_of_states(basis.m_star, spec.spin_degeneracy)

    if spec.mode == "pinned":
        if spec.j_pin > len(E):
            raise OccupancyError(
                f"j_pin={spec.j_pin} exceeds the {len(E)} available subbands"
            )
        E_F = float(E[spec.j_pin - 1])
    else:
        n_e = spec.n_e
        E_F = None
        for k in range(1, len(E) + 1):
            candidate = n_e / (k * rho) + E[:k].mean()
            if candidate < E[k - 1] - 1e-12:
                continue
            if k == len(E) or candidate <= E[k]:
                E_F = float(candidate)
                break
        if E_F is None or E_F >= E[-1]:
            raise OccupancyError(
                "Fermi level lies above the highest computed subband; "
                "increase n_subbands"
            )

    N = spec.surface * rho * np.maximum(E_F - E, 0.0)
    occupied = np.nonzero(N > 0)[0]
    j_F = int(occupied[-1]) + 1 if len(occupied) else 0
    if j_F == 0:
        raise OccupancyError("no subband is populated")
    n = N / spec.surface
    return SubbandPopulations(
        E_F=E_F, j_F=j_F, N=N, n=n, n_e=float(n.sum()),
        surface=spec.surface, rho=rho, spin_degeneracy=spec.spin_degeneracy,
    )


class TransitionIndex(NamedTuple):
    """One allowed collective transition nu = (l, j), 1-based indices."""

    l: int
    j: int
    hw: float   # hbar omega_nu = E_l - E_j, meV
    N: float    # N_nu = N_j - N_l


def enumerate_transitions(populations: SubbandPopulations, basis: SubbandBasis,
                          eps_N: float = 1.0e-9) -> list[TransitionIndex]:
    """All ordered pairs with j <= j_F, l > j and N_nu = N_j - N_l > eps_N * N_1.

    The eps_N cut removes transitions between (nearly) equally filled
    subbands, whose 1/sqrt(N_nu) normalization would blow up.
    """
    E = basis.energies
    N = populations.N
    floor = eps_N * N[0]
    out = []
    for j in range(1, populations.j_F + 1):
        for l in range(j + 1, basis.n_subbands + 1):
            N_nu = N[j - 1] - N[l - 1]
            if N_nu <= floor:
                continue
            out.append(TransitionIndex(l=l, j=j, hw=float(E[l - 1] - E[j - 1]), N=float(N_nu)))
    return out
