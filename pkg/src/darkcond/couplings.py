"""Current matrix functions, collective Rabi couplings and depolarization matrix.

For a transition nu = (l, j) the current matrix function is

    xi_nu(z) = phi_l'(z) phi_j(z) - phi_l(z) phi_j'(z)      [nm^-2]

with the periodic derivative operator. All omega-like quantities are stored
as hbar*omega in meV; conversion to rad/ps happens only where tau*omega
products are formed (kubo module). Couplings scale as

    (hbar Omega_nu)^2 = K N_nu (hbar w_c) (int xi)^2 / (L_c (hbar w_nu)^2)
    hbar Xi_nu^nu'    = K sqrt(N_nu N_nu') int xi_nu xi_nu' dz / ((hbar w_nu)(hbar w_nu'))

with K = (e^2/eps0) (hbar^2/m_star)^2 / (8 eps_r S). Omega^2 is linear in the
cavity frequency, so the resonant coupling Omega_res = Omega at w_c = w_nu
determines Omega at any w_c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import E2_OVER_EPS0, HBAR2_OVER_2ME
from .occupancy import SubbandPopulations, TransitionIndex, enumerate_transitions
from .structure import Grid, SubbandBasis, derivative, integrate


def xi(basis: SubbandBasis, l: int, j: int) -> np.ndarray:
    """Current matrix function xi_(l,j)(z) on the grid, nm^-2."""
    phi_l = basis.wavefunction(l)
    phi_j = basis.wavefunction(j)
    return (derivative(phi_l, basis.grid) * phi_j
            - phi_l * derivative(phi_j, basis.grid))


def coupling_scale(m_star, surface, eps_r) -> float:
    """K = (e^2/eps0) (hbar^2/m_star)^2 / (8 eps_r S), meV^3 nm^3."""
    hbar2_over_m = 2.0 * HBAR2_OVER_2ME / m_star  # meV nm^2
    return E2_OVER_EPS0 * hbar2_over_m**2 / (8.0 * eps_r * surface)


@dataclass(frozen=True)
class Transition:
    """Catalog entry for one collective transition."""

    l: int
    j: int
    hw: float                 # hbar omega_nu, meV
    N: float                  # participating electrons
    xi: np.ndarray            # xi_nu(z), nm^-2
    xi_tilde: np.ndarray      # sqrt(N_nu/N_e) xi_nu(z), nm^-2
    integral_xi: float        # int xi_nu dz, nm^-1
    omega_res: float          # hbar Omega_nu at w_c = w_nu, meV
    xi_self: float            # hbar Xi_nu^nu (diagonal depolarization), meV

    @property
    def label(self) -> str:
        return f"({self.l},{self.j})"


@dataclass(frozen=True)
class TransitionCatalog:
    """All allowed transitions plus the depolarization matrix Xi (meV)."""

    grid: Grid
    m_star: float
    surface: float
    eps_r: float
    n_e: float                       # nm^-2
    N_e: float                       # total electron number
    entries: tuple[Transition, ...]
    Xi: np.ndarray                   # hbar Xi_nu^nu', meV, shape (N_t, N_t)

    @property
    def n_transitions(self) -> int:
        return len(self.entries)

    @property
    def hw(self) -> np.ndarray:
        return np.array([t.hw for t in self.entries])

    @property
    def omega_res(self) -> np.ndarray:
        return np.array([t.omega_res for t in self.entries])

    @property
    def xi_tilde(self) -> np.ndarray:
        """Stacked xi_tilde functions, shape (N_t, n_points)."""
        if not self.entries:
            return np.zeros((0, self.grid.n_points))
        return np.stack([t.xi_tilde for t in self.entries])

    def entry(self, l: int, j: int) -> Transition:
        for t in self.entries:
            if t.l == l and t.j == j:
                return t
        raise KeyError(f"transition ({l},{j}) not in catalog")

    def index(self, l: int, j: int) -> int:
        for k, t in enumerate(self.entries):
            if t.l == l and t.j == j:
                return k
        raise KeyError(f"transition ({l},{j}) not in catalog")

    def restricted(self, l: int, j: int) -> "TransitionCatalog":
        """Single-transition view (dominant-transition studies)."""
        k = self.index(l, j)
        return TransitionCatalog(
            grid=self.grid, m_star=self.m_star, surface=self.surface,
            eps_r=self.eps_r, n_e=self.n_e, N_e=self.N_e,
            entries=(self.entries[k],), Xi=self.Xi[k:k + 1, k:k + 1].copy(),
        )

    def decoupled(self) -> "TransitionCatalog":
        """Copy with Omega = Xi = 0 (noninteracting limit of the polariton problem)."""
        entries = tuple(
            Transition(l=t.l, j=t.j, hw=t.hw, N=t.N, xi=t.xi, xi_tilde=t.xi_tilde,
                       integral_xi=t.integral_xi, omega_res=0.0, xi_self=0.0)
            for t in self.entries
        )
        return TransitionCatalog(
            grid=self.grid, m_star=self.m_star, surface=self.surface,
            eps_r=self.eps_r, n_e=self.n_e, N_e=self.N_e,
            entries=entries, Xi=np.zeros_like(self.Xi),
        )


def rabi(entry: Transition, hw_c) -> float:
    """hbar Omega_nu at cavity energy hw_c (meV); Omega^2 is linear in w_c."""
    return entry.omega_res * np.sqrt(np.asarray(hw_c, dtype=float) / entry.hw)


def depolarization_matrix(xi_funcs: np.ndarray, N: np.ndarray, hw: np.ndarray,
                          grid: Grid, scale: float) -> np.ndarray:
    """hbar Xi matrix from stacked xi functions; symmetric PSD Gram matrix."""
    if len(N) == 0:
        return np.zeros((0, 0))
    overlaps = (xi_funcs @ xi_funcs.T) * grid.dz          # int xi_a xi_b dz
    weights = np.sqrt(N)[:, None] / hw[:, None]
    M = scale * weights * weights.T * overlaps
    return 0.5 * (M + M.T)  # symmetrize away rounding noise


def build_catalog(basis: SubbandBasis, populations: SubbandPopulations,
                  eps_r: float = 13.0, eps_N: float = 1.0e-9,
                  transitions: list[TransitionIndex] | None = None) -> TransitionCatalog:
    """Assemble the transition catalog for a solved basis and its populations."""
    if transitions is None:
        transitions = enumerate_transitions(populations, basis, eps_N=eps_N)
    grid = basis.grid
    S = populations.surface
    N_e = populations.N_total
    K = coupling_scale(basis.m_star, S, eps_r)

    xi_funcs = np.array([xi(basis, t.l, t.j) for t in transitions]).reshape(
        len(transitions), grid.n_points)
    N = np.array([t.N for t in transitions])
    hw = np.array([t.hw for t in transitions])
    Xi = depolarization_matrix(xi_funcs, N, hw, grid, K)

    entries = []
    for k, t in enumerate(transitions):
        I = float(integrate(xi_funcs[k], grid))
        omega_res2 = K * t.N * I**2 / (grid.length * t.hw)
        entries.append(Transition(
            l=t.l, j=t.j, hw=t.hw, N=t.N,
            xi=xi_funcs[k],
            xi_tilde=np.sqrt(t.N / N_e) * xi_funcs[k],
            integral_xi=I,
            omega_res=float(np.sqrt(omega_res2)),
            xi_self=float(Xi[k, k]),
        ))
    return TransitionCatalog(
        grid=grid, m_star=basis.m_star, surface=S, eps_r=eps_r,
        n_e=populations.n_e, N_e=N_e, entries=tuple(entries), Xi=Xi,
    )


def cauchy_schwarz_slack(catalog: TransitionCatalog) -> np.ndarray:
    """Per-transition slack Xi_nu^nu / w_nu - (Omega_res / w_nu)^2 (>= 0)."""
    if not catalog.entries:
        return np.zeros(0)
    hw = catalog.hw
    return np.diag(catalog.Xi) / hw - (catalog.omega_res / hw) ** 2
