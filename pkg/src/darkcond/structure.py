"""Heterostructure potentials and the periodic one-dimensional eigenproblem.

The spacer [-L_c/2, L_c/2] is discretized on a uniform grid with periodic
topology: z = +L_c/2 is the same point as z = -L_c/2, and "the value at the
lead" always means grid index 0. The effective-mass Schrodinger equation is
discretized with second-order central differences and solved as a dense real
symmetric eigenproblem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .constants import HBAR2_OVER_2ME

# degenerate eigenvalues are grouped and re-orthogonalized below this gap (meV)
DEGENERACY_TOL = 1.0e-8
# sign convention: first wavefunction sample exceeding this magnitude is made positive
SIGN_THRESHOLD = 1.0e-6


class StructureError(ValueError):
    """Invalid heterostructure specification."""


class EigensolverError(RuntimeError):
    """Eigenproblem did not meet the residual / orthonormality bounds."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid over the cavity spacer.

    n_points: number of samples (>= 64); dz * n_points = L_c exactly.
    """

    n_points: int
    length: float  # L_c, nm

    def __post_init__(self):
        if self.n_points < 64:
            raise StructureError(f"n_points must be >= 64, got {self.n_points}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise StructureError(f"L_c must be positive and finite, got {self.length}")

    @property
    def dz(self) -> float:
        return self.length / self.n_points

    @property
    def z(self) -> np.ndarray:
        return -0.5 * self.length + self.dz * np.arange(self.n_points)


@dataclass(frozen=True)
class Well:
    """Square well segment: center (nm), width (nm), depth below the barrier (meV)."""

    center: float
    width: float
    depth: float

    def __post_init__(self):
        if self.width <= 0:
            raise StructureError(f"well width must be positive, got {self.width}")
        if self.depth <= 0:
            raise StructureError(f"well depth must be positive, got {self.depth}")


@dataclass(frozen=True)
class PotentialProfile:
    """Sampled potential V(z_k) in meV, shifted so min(V) = 0."""

    grid: Grid
    values: np.ndarray
    wells: tuple[Well, ...] = ()
    barrier: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise StructureError("potential contains non-finite samples")


def build_potential(wells, barrier, grid: Grid) -> PotentialProfile:
    """Sample a multi-well potential on the grid.

    V equals `barrier` outside the wells and `barrier - depth` inside. Grid
    points landing exactly on a well edge get the midpoint value (cell-average
    sampling), which keeps the discretization cleanly second order when edges
    are grid-aligned. The profile is shifted so that min(V) = 0.
    """
    wells = tuple(wells)
    half = 0.5 * grid.length
    for w in wells:
        if w.center - 0.5 * w.width <= -half or w.center + 0.5 * w.width >= half:
            raise StructureError(
                f"well at center={w.center} nm, width={w.width} nm extends past +-L_c/2"
            )
    ordered = sorted(wells, key=lambda w: w.center)
    for a, b in zip(ordered, ordered[1:]):
        if a.center + 0.5 * a.width > b.center - 0.5 * b.width:
            raise StructureError(
                f"wells at centers {a.center} nm and {b.center} nm overlap"
            )

    z = grid.z
    V = np.full(grid.n_points, float(barrier))
    edge_tol = 1.0e-9 * max(grid.dz, 1.0)
    for w in wells:
        dist = np.abs(z - w.center)
        V[dist < 0.5 * w.width - edge_tol] = barrier - w.depth
        V[np.abs(dist - 0.5 * w.width) <= edge_tol] = barrier - 0.5 * w.depth
    V -= V.min()
    return PotentialProfile(grid=grid, values=V, wells=wells, barrier=float(barrier))


def evenly_spaced_wells(n_qw, pitch=20.0, width=5.0, depth=100.0):
    """n_qw identical wells at the given pitch; returns (wells, L_c = n_qw * pitch)."""
    if n_qw < 1:
        raise StructureError(f"n_qw must be >= 1, got {n_qw}")
    length = n_qw * pitch
    centers = -0.5 * length + 0.5 * pitch + pitch * np.arange(n_qw)
    return [Well(center=c, width=width, depth=depth) for c in centers], length


def hamiltonian(potential: PotentialProfile, m_star: float) -> np.ndarray:
    """Dense periodic finite-difference Hamiltonian, meV."""
    grid = potential.grid
    t = HBAR2_OVER_2ME / (m_star * grid.dz**2)  # kinetic hopping, meV
    n = grid.n_points
    H = np.diag(potential.values + 2.0 * t)
    idx = np.arange(n)
    H[idx, (idx + 1) % n] -= t
    H[idx, (idx - 1) % n] -= t
    return H


@dataclass(frozen=True)
class SubbandBasis:
    """Lowest eigenpairs of the vertical problem.

    energies: ascending E_j in meV, shape (n_subbands,).
    phi: real wavefunctions phi_j(z_k) in nm^-1/2, shape (n_subbands, n_points),
    normalized so sum_k phi_i phi_j dz = delta_ij. Subband indices are 1-based
    in the public API (paper-style (l, j) labels).
    """

    grid: Grid
    m_star: float
    energies: np.ndarray
    phi: np.ndarray
    max_residual: float = 0.0

    @property
    def n_subbands(self) -> int:
        return len(self.energies)

    def wavefunction(self, j: int) -> np.ndarray:
        """phi_j for a 1-based subband index."""
        return self.phi[j - 1]

    def truncated(self, n_subbands: int) -> "SubbandBasis":
        """View keeping only the lowest n_subbands states."""
        if not (1 <= n_subbands <= self.n_subbands):
            raise StructureError(
                f"cannot truncate to {n_subbands} of {self.n_subbands} subbands"
            )
        return SubbandBasis(grid=self.grid, m_star=self.m_star,
                            energies=self.energies[:n_subbands],
                            phi=self.phi[:n_subbands],
                            max_residual=self.max_residual)

    def energy(self, j: int) -> float:
        return float(self.energies[j - 1])


def _fix_signs(vecs: np.ndarray, dz: float) -> np.ndarray:
    # first sample of |phi| above SIGN_THRESHOLD made positive, per column
    phi = vecs / np.sqrt(dz)
    out = vecs.copy()
    for k in range(vecs.shape[1]):
        above = np.nonzero(np.abs(phi[:, k]) > SIGN_THRESHOLD)[0]
        pivot = above[0] if len(above) else int(np.argmax(np.abs(phi[:, k])))
        if phi[pivot, k] < 0:
            out[:, k] = -out[:, k]
    return out


def solve_subbands(potential: PotentialProfile, m_star: float, n_subbands: int) -> SubbandBasis:
    """Solve the periodic effective-mass eigenproblem for the lowest subbands.

    Degenerate clusters (gap below DEGENERACY_TOL) are explicitly
    re-orthonormalized and every column gets a deterministic sign so repeated
    runs are reproducible. Raises EigensolverError if the residual
    ||H phi - E phi|| exceeds its bound.
    """
    grid = potential.grid
    if n_subbands < 1 or n_subbands > grid.n_points:
        raise StructureError(
            f"n_subbands must be in [1, n_points={grid.n_points}], got {n_subbands}"
        )
    H = hamiltonian(potential, m_star)
    energies, vecs = eigh(H, subset_by_index=(0, n_subbands - 1))

    # re-orthonormalize degenerate clusters (QR leaves non-degenerate columns alone)
    start = 0
    while start < n_subbands:
        stop = start + 1
        while stop < n_subbands and energies[stop] - energies[stop - 1] <= DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            q, _ = np.linalg.qr(vecs[:, start:stop])
            vecs[:, start:stop] = q
        start = stop

    vecs = _fix_signs(vecs, grid.dz)

    residual = np.linalg.norm(H @ vecs - vecs * energies, axis=0)
    scale = np.abs(H).sum(axis=1).max()  # ~ ||H||_inf, for the machine-noise floor
    bound = max(1.0e-8, 200.0 * np.finfo(float).eps * scale)
    if residual.max() > bound:
        raise EigensolverError(
            f"eigensolver residual {residual.max():.3e} exceeds bound {bound:.3e}"
        )

    phi = (vecs / np.sqrt(grid.dz)).T.copy()
    return SubbandBasis(
        grid=grid,
        m_star=m_star,
        energies=energies.copy(),
        phi=phi,
        max_residual=float(residual.max()),
    )


def derivative(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order central difference with periodic wrap."""
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * grid.dz)


def integrate(f: np.ndarray, grid: Grid):
    """Periodic rectangle rule (exact trapezoid on a ring)."""
    return f.sum(axis=-1) * grid.dz
