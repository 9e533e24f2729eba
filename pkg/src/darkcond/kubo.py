"""Nonlocal response kernel and the dark vertical conductance.

The noninteracting kernel is a sum of rank-1 terms over transitions,

    chi_NI(z,z') = (hbar n_e e^2 / 2 m*^2) sum_nu (tau0/w_nu)
                   xt_nu(z) xt_nu(z') / (1 + (tau0 w_nu)^2),

with xt_nu = sqrt(N_nu/N_e) xi_nu; the cavity-dressed kernel has the same
form over polariton branches with effective functions
xt_r^eff = sum_nu (x_{r,nu} + z_{r,nu}) xt_nu and mixed times tau_r. The
two-probe conductance evaluates the kernel at the lead (grid index 0, the
periodic identification of z = +-L_c/2):

    G = -(S/L_c) (hbar n_e e^2 / 2 m*^2) sum_r (tau_r/w_r)
        xt_r^eff*(lead) int xt_r^eff dz' / (1 + (tau_r w_r)^2).

G is computed exactly as written and reported signed (it comes out positive
for the structures treated here); quantitative statements should use ratios
like G/G0, which are convention independent. Conductances are in siemens,
kernels in S/nm^2. tau/omega products are formed in rad/ps and ps; the
numerically safe weight gamma/(w (gamma^2 + w^2)) with gamma = 1/tau is used
so tau = inf (dark photon branches) contributes zero without special cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import E2_SIEMENS, HBAR, effective_mass
from .couplings import Transition, TransitionCatalog
from .polariton import PolaritonSpectrum, mixing_rate, two_subband_solve
from .structure import Grid, integrate


def lorentzian_weight(omega, gamma):
    """(tau/w) / (1 + (tau w)^2) written as gamma / (w (gamma^2 + w^2)), ps^2."""
    omega = np.asarray(omega, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    return gamma / (omega * (gamma**2 + omega**2))


def response_prefactor(catalog: TransitionCatalog) -> float:
    """hbar n_e e^2 / (2 m*^2) in S/nm^2 per ps^2 per nm^-4 unit, i.e. the
    factor multiplying weight * xi * xi in the kernel."""
    m_eff = effective_mass(catalog.m_star)
    return HBAR * catalog.n_e / (2.0 * m_eff**2) * E2_SIEMENS


def conductance_prefactor(catalog: TransitionCatalog) -> float:
    """(S/L_c) * hbar n_e e^2 / (2 m*^2), siemens per (ps^2 nm^-3)."""
    return catalog.surface / catalog.grid.length * response_prefactor(catalog)


@dataclass(frozen=True)
class ResponseKernel:
    """Nonlocal response chi(z_k, z_k'), S/nm^2, symmetric."""

    grid: Grid
    chi: np.ndarray
    flavor: str  # "noninteracting" | "interacting"

    def symmetry_defect(self) -> float:
        scale = np.abs(self.chi).max() or 1.0
        return float(np.abs(self.chi - self.chi.T).max() / scale)


def chi_noninteracting(catalog: TransitionCatalog, tau0: float) -> ResponseKernel:
    """Noninteracting kernel: rank-1 sum over the transition catalog."""
    n = catalog.grid.n_points
    chi = np.zeros((n, n))
    pref = response_prefactor(catalog)
    for t in catalog.entries:
        w = lorentzian_weight(t.hw / HBAR, 1.0 / tau0)
        chi += (pref * w) * np.outer(t.xi_tilde, t.xi_tilde)
    return ResponseKernel(grid=catalog.grid, chi=chi, flavor="noninteracting")


def xi_eff(spectrum: PolaritonSpectrum, catalog: TransitionCatalog) -> np.ndarray:
    """Effective current functions xt_r^eff(z), shape (n_branches, n_points)."""
    if spectrum.n_transitions != catalog.n_transitions:
        raise ValueError("spectrum and catalog carry different transition sets")
    return spectrum.coeff_sum @ catalog.xi_tilde


def chi_interacting(spectrum: PolaritonSpectrum, catalog: TransitionCatalog,
                    tau0: float, tau_p: float) -> ResponseKernel:
    """Cavity-dressed kernel: rank-1 sum over polariton branches."""
    n = catalog.grid.n_points
    chi = np.zeros((n, n))
    pref = response_prefactor(catalog)
    xeff = xi_eff(spectrum, catalog)
    gammas = mixing_rate(spectrum.We, tau0, tau_p)
    for r in range(spectrum.n_branches):
        w = lorentzian_weight(spectrum.hw[r] / HBAR, gammas[r])
        chi += (pref * w) * np.real(np.outer(np.conj(xeff[r]), xeff[r]))
    return ResponseKernel(grid=catalog.grid, chi=chi, flavor="interacting")


def current_profile(kernel: ResponseKernel, delta_U: float = 1.0) -> np.ndarray:
    """Current density response dJ(z) to a bias delta_U across the spacer.

    Uses the uniform-field approximation E_z = -delta_U / L_c; dJ is in
    A/nm^2 per volt of bias when delta_U is in volts.
    """
    E_z = -delta_U / kernel.grid.length
    return kernel.chi.sum(axis=1) * kernel.grid.dz * E_z


def noninteracting_contributions(catalog: TransitionCatalog, tau0: float) -> np.ndarray:
    """Per-transition terms of G_NI (siemens); G_NI is their sum."""
    if not catalog.entries:
        return np.zeros(0)
    pref = conductance_prefactor(catalog)
    out = np.empty(catalog.n_transitions)
    for k, t in enumerate(catalog.entries):
        w = lorentzian_weight(t.hw / HBAR, 1.0 / tau0)
        boundary = t.xi_tilde[0]  # value at the lead (periodic seam)
        out[k] = -pref * w * boundary * integrate(t.xi_tilde, catalog.grid)
    return out


def conductance_noninteracting(catalog: TransitionCatalog, tau0: float) -> float:
    """G_NI in siemens."""
    return float(noninteracting_contributions(catalog, tau0).sum())


@dataclass(frozen=True)
class LimitConductances:
    """Closed-form single-transition limits of the cavity conductance."""

    G_NI: float     # noninteracting conductance of the dominant transition, S
    G_zero: float   # w_c -> 0 limit, S
    G_inf: float    # w_c -> inf limit, S

    @property
    def ratio_zero(self) -> float:
        return self.G_zero / self.G_NI

    @property
    def ratio_inf(self) -> float:
        return self.G_inf / self.G_NI


def two_subband_limit_ratios(tau0_omega: float, xi_over_omega: float,
                             omega_res_over_omega: float) -> tuple[float, float]:
    """(G_{wc->0}/G_NI, G_{wc->inf}/G_NI) for one transition.

    Full expressions, valid in both tau0*w regimes:

        G0/G_NI   = (1 + t^2) / (1 + t^2 (1 + 4 x))
        Ginf/G_NI = (1 + t^2) / (1 + t^2 (1 + 4 (x - y^2)))

    with t = tau0 w_nu, x = Xi/w_nu, y = Omega_res/w_nu. The Cauchy-Schwarz
    bound x >= y^2 makes G0 <= Ginf <= G_NI for every consistent catalog.
    """
    t2 = tau0_omega**2
    num = 1.0 + t2
    r0 = num / (1.0 + t2 * (1.0 + 4.0 * xi_over_omega))
    rinf = num / (1.0 + t2 * (1.0 + 4.0 * (xi_over_omega - omega_res_over_omega**2)))
    return r0, rinf


def limit_conductances(catalog: TransitionCatalog, entry: Transition,
                       tau0: float) -> LimitConductances:
    """Closed-form w_c -> 0 and w_c -> inf conductances for one transition."""
    pref = conductance_prefactor(catalog)
    w_nu = entry.hw / HBAR
    weight = lorentzian_weight(w_nu, 1.0 / tau0)
    gni = float(-pref * weight * entry.xi_tilde[0] * integrate(entry.xi_tilde, catalog.grid))
    r0, rinf = two_subband_limit_ratios(
        tau0 * w_nu, entry.xi_self / entry.hw, entry.omega_res / entry.hw)
    return LimitConductances(G_NI=gni, G_zero=gni * r0, G_inf=gni * rinf)


def dominant_transition(catalog: TransitionCatalog, tau0: float,
                        override: tuple[int, int] | None = None) -> Transition:
    """Transition with the largest |G_NI contribution| (or an explicit (l, j))."""
    if override is not None:
        return catalog.entry(*override)
    if not catalog.entries:
        raise ValueError("empty catalog")
    contrib = noninteracting_contributions(catalog, tau0)
    return catalog.entries[int(np.argmax(np.abs(contrib)))]


def two_subband_over_gni(spectrum: PolaritonSpectrum, hw_nu: float,
                         tau0: float, tau_p: float) -> float:
    """G_2sb / G_NI_nu from a two-branch spectrum.

    Uses |x_r + z_r|^2 = W_e,r w_r / w_nu, which turns the branch sum into

        G/G_NI = (1 + (tau0 w_nu)^2) / tau0 * sum_r tau_r W_e,r / (1 + (tau_r w_r)^2)

    (the familiar sum over (1 + t^2)/(1 + (tau_r w_r)^2) when tau_p = inf).
    """
    w_nu = hw_nu / HBAR
    omegas = spectrum.hw / HBAR
    gammas = mixing_rate(spectrum.We, tau0, tau_p)
    terms = spectrum.We * gammas / (gammas**2 + omegas**2)
    return float((1.0 + (tau0 * w_nu) ** 2) / tau0 * terms.sum())


def two_subband_conductance(catalog: TransitionCatalog, entry: Transition,
                            hw_c: float, tau0: float, tau_p: float) -> float:
    """Dominant-transition approximation of the dark conductance, siemens."""
    spectrum = two_subband_solve(hw_c, entry.hw, entry.omega_res, entry.xi_self)
    lim = limit_conductances(catalog, entry, tau0)
    return lim.G_NI * two_subband_over_gni(spectrum, entry.hw, tau0, tau_p)


@dataclass(frozen=True)
class ConductanceResult:
    """Dark conductance and its decomposition at one cavity frequency."""

    G: float                       # siemens
    G_NI: float                    # siemens
    branch_G: np.ndarray           # per-branch contributions, sum == G
    branch_hw: np.ndarray          # branch energies, meV
    branch_We: np.ndarray
    delta_J: np.ndarray            # current profile per unit bias, A/nm^2
    limits: LimitConductances | None = None
    metadata: dict = field(default_factory=dict)


def conductance_interacting(spectrum: PolaritonSpectrum, catalog: TransitionCatalog,
                            tau0: float, tau_p: float,
                            with_profile: bool = True,
                            limits: LimitConductances | None = None) -> ConductanceResult:
    """Cavity conductance from a polariton spectrum, with per-branch terms."""
    pref = conductance_prefactor(catalog)
    xeff = xi_eff(spectrum, catalog)
    gammas = mixing_rate(spectrum.We, tau0, tau_p)
    omegas = spectrum.hw / HBAR
    weights = lorentzian_weight(omegas, gammas)

    boundary = np.conj(xeff[:, 0])
    integrals = integrate(xeff, catalog.grid)
    branch_G = -pref * weights * np.real(boundary * integrals)

    delta_J = np.zeros(catalog.grid.n_points)
    if with_profile:
        # dJ(z) = int chi(z, z') E_z dz' without materializing the kernel
        E_z = -1.0 / catalog.grid.length
        resp = response_prefactor(catalog)
        profile = np.real(np.conj(xeff).T @ (weights * integrals))
        delta_J = resp * E_z * profile

    return ConductanceResult(
        G=float(branch_G.sum()),
        G_NI=conductance_noninteracting(catalog, tau0),
        branch_G=branch_G,
        branch_hw=spectrum.hw.copy(),
        branch_We=spectrum.We.copy(),
        delta_J=delta_J,
        limits=limits,
        metadata=dict(tau0_ps=tau0, tau_p_ps=tau_p, hw_c_meV=spectrum.hw_c,
                      n_points=catalog.grid.n_points,
                      n_transitions=catalog.n_transitions),
    )
