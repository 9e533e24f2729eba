"""Hopfield-Bogoliubov diagonalization of the cavity + transitions Hamiltonian.

The dynamic matrix acts on coefficient vectors v = (w, x_1.., y, z_1..) and is
assembled verbatim in the block pattern

    [  w_c   -O    0    O  ]
    [ -O+   W+D  -O+   -D  ]          O  = (i Omega_1, i Omega_2, ...)
    [   0    O   -w_c  -O  ]          W  = diag(w_nu)
    [ -O+    D   -O+  -W-D ]          D  = 2 Xi

(O+ is the conjugate transpose of the row O). Physical polariton branches are
the eigenvectors with positive frequency and positive hyperbolic norm
|w|^2 - |y|^2 + sum(|x|^2 - |z|^2), rescaled to norm +1. The independent
closed-form solution of the single-transition 4x4 problem lives in
two_subband_solve and doubles as an oracle for the general solver.

Energies are hbar*omega in meV throughout; the eigenproblem is scale
invariant so no unit conversion is needed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eig
from scipy.optimize import linear_sum_assignment

from .couplings import TransitionCatalog

# a branch frequency with |Im| above max(IMAG_TOL * |Re|, noise floor) marks an
# unstable (over-critical) parameter set
IMAG_TOL = 1.0e-6
CLUSTER_TOL = 1.0e-9   # relative gap below which eigenvalues count as degenerate


class UnstableSpectrumError(RuntimeError):
    """Complex branch frequency or indefinite normalization: over-critical set."""


@dataclass(frozen=True)
class PolaritonSpectrum:
    """Physical branches, sorted by ascending frequency.

    hw: branch energies hbar*w_r^I (meV). w, y are the photon coefficients and
    x, z the matter coefficients of each branch (rows); all satisfy the
    hyperbolic normalization +1. We is the electronic weight per branch.
    """

    hw_c: float
    hw: np.ndarray           # (n_branches,)
    w: np.ndarray            # (n_branches,) complex
    x: np.ndarray            # (n_branches, n_transitions) complex
    y: np.ndarray            # (n_branches,) complex
    z: np.ndarray            # (n_branches, n_transitions) complex
    We: np.ndarray           # (n_branches,)

    @property
    def n_branches(self) -> int:
        return len(self.hw)

    @property
    def n_transitions(self) -> int:
        return self.x.shape[1]

    @property
    def coeff_sum(self) -> np.ndarray:
        """x_{r,nu} + z_{r,nu}, the combination entering the current operator."""
        return self.x + self.z

    def vectors(self) -> np.ndarray:
        """Coefficient vectors (w, x.., y, z..) as rows, shape (n_branches, dim)."""
        return np.hstack([self.w[:, None], self.x, self.y[:, None], self.z])

    def norms(self) -> np.ndarray:
        """Hyperbolic norms (should all be +1)."""
        return (np.abs(self.w) ** 2 - np.abs(self.y) ** 2
                + np.sum(np.abs(self.x) ** 2 - np.abs(self.z) ** 2, axis=1))

    def permuted(self, order) -> "PolaritonSpectrum":
        order = np.asarray(order)
        return PolaritonSpectrum(
            hw_c=self.hw_c, hw=self.hw[order], w=self.w[order],
            x=self.x[order], y=self.y[order], z=self.z[order], We=self.We[order],
        )


def electronic_weight(x_row: np.ndarray, z_row: np.ndarray) -> float:
    """W_e = sum |x|^2 - sum |z|^2 for one normalized branch."""
    return float(np.sum(np.abs(x_row) ** 2) - np.sum(np.abs(z_row) ** 2))


def mixing_rate(We, tau0: float, tau_p: float):
    """1/tau_r = W_e/tau0 + (1-W_e)/tau_p. tau_p may be inf."""
    We = np.asarray(We, dtype=float)
    return We / tau0 + (1.0 - We) / tau_p


def scattering_time(We, tau0: float, tau_p: float):
    """Mixed light-matter scattering time tau_r (ps); inf for a dark photon."""
    rate = mixing_rate(We, tau0, tau_p)
    with np.errstate(divide="ignore"):
        return np.where(rate > 0.0, 1.0 / rate, np.inf)


def build_matrix(catalog: TransitionCatalog, hw_c: float) -> np.ndarray:
    """Assemble the dynamic matrix at cavity energy hw_c (meV)."""
    if hw_c < 0:
        raise ValueError(f"cavity energy must be >= 0, got {hw_c}")
    nt = catalog.n_transitions
    s = 1 + nt
    M = np.zeros((2 * s, 2 * s), dtype=complex)

    hw = catalog.hw
    omega = catalog.omega_res * np.sqrt(hw_c / hw) if nt else np.zeros(0)
    O = 1j * omega                      # row vector
    O_dag = np.conj(O)                  # entries of the adjoint column
    W = np.diag(hw)
    D = 2.0 * catalog.Xi

    M[0, 0] = hw_c
    M[0, 1:s] = -O
    M[0, s + 1:] = O
    M[1:s, 0] = -O_dag
    M[1:s, 1:s] = W + D
    M[1:s, s] = -O_dag
    M[1:s, s + 1:] = -D
    M[s, 1:s] = O
    M[s, s] = -hw_c
    M[s, s + 1:] = -O
    M[s + 1:, 0] = -O_dag
    M[s + 1:, 1:s] = D
    M[s + 1:, s] = -O_dag
    M[s + 1:, s + 1:] = -W - D
    return M


def _phase_fix(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    phase = v[k] / abs(v[k])
    return v * np.conj(phase)


def diagonalize(M: np.ndarray, hw_c: float | None = None) -> PolaritonSpectrum:
    """Extract the physical polariton branches of a dynamic matrix.

    Branches are eigenvectors with positive frequency and positive hyperbolic
    norm, rescaled to norm +1 (degenerate clusters are re-orthonormalized in
    the indefinite metric), sorted ascending, with the largest-magnitude
    coefficient of each branch made real positive. Raises
    UnstableSpectrumError on complex frequencies or an indefinite cluster.
    """
    dim = M.shape[0]
    nt = dim // 2 - 1
    lam, V = eig(M)

    matrix_scale = float(np.abs(M).sum(axis=1).max())
    imag_floor = np.maximum(IMAG_TOL * np.abs(lam.real), 1.0e-9 * matrix_scale)
    bad = np.abs(lam.imag) > imag_floor
    if np.any(bad):
        worst = lam[np.argmax(np.abs(lam.imag))]
        raise UnstableSpectrumError(
            f"complex branch frequency {worst:.6g} meV: over-critical parameter set"
        )
    cond = np.linalg.cond(V)
    if cond > 1.0e12:
        raise UnstableSpectrumError(
            f"near-defective eigenbasis (condition estimate {cond:.2e})"
        )

    freqs = lam.real
    eta = np.ones(dim)
    eta[dim // 2:] = -1.0

    pos = np.nonzero(freqs > 1.0e-12 * matrix_scale)[0]
    order = pos[np.argsort(freqs[pos])]
    freqs_pos = freqs[order]
    vecs = V[:, order]

    # group numerically degenerate frequencies and orthonormalize each cluster
    # in the eta metric (Gram must be positive definite for a stable set)
    branches = []
    start = 0
    tol = CLUSTER_TOL * max(matrix_scale, 1.0)
    while start < len(order):
        stop = start + 1
        while stop < len(order) and freqs_pos[stop] - freqs_pos[stop - 1] <= tol:
            stop += 1
        block = vecs[:, start:stop]
        gram = block.conj().T @ (eta[:, None] * block)
        gram = 0.5 * (gram + gram.conj().T)
        try:
            L = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise UnstableSpectrumError(
                "indefinite hyperbolic norm in a degenerate cluster "
                f"near {freqs_pos[start]:.6g} meV"
            ) from None
        block = block @ np.linalg.inv(L).conj().T
        for k in range(stop - start):
            branches.append((freqs_pos[start + k], _phase_fix(block[:, k])))
        start = stop

    if len(branches) != 1 + nt:
        raise UnstableSpectrumError(
            f"selected {len(branches)} physical branches, expected {1 + nt}"
        )

    hw = np.array([b[0] for b in branches])
    vmat = np.array([b[1] for b in branches])
    s = 1 + nt
    x = vmat[:, 1:s]
    z = vmat[:, s + 1:]
    We = np.sum(np.abs(x) ** 2, axis=1) - np.sum(np.abs(z) ** 2, axis=1)
    return PolaritonSpectrum(
        hw_c=float(hw_c) if hw_c is not None else float("nan"),
        hw=hw, w=vmat[:, 0], x=x, y=vmat[:, s], z=z, We=We,
    )


def solve_polaritons(catalog: TransitionCatalog, hw_c: float) -> PolaritonSpectrum:
    """build_matrix + diagonalize in one step."""
    return diagonalize(build_matrix(catalog, hw_c), hw_c=hw_c)


def two_subband_solve(hw_c: float, hw_nu: float, omega_res: float,
                      xi_self: float) -> PolaritonSpectrum:
    """Closed-form branches of the single-transition 4x4 problem.

    The dispersion relation is

        (L^2 - w_c^2)(L^2 - wt^2) = 4 Omega_res^2 w_c^2,
        wt^2 = w_nu (w_nu + 4 Xi),

    a quadratic in L^2, and the coefficients follow from the eigenvector
    structure. This path shares no code with the general diagonalizer and is
    used both as the dominant-transition approximation and as its oracle.
    All arguments are hbar-scaled (meV).
    """
    wt2 = hw_nu * (hw_nu + 4.0 * xi_self)
    if wt2 <= 0:
        raise UnstableSpectrumError(f"matter frequency squared {wt2:.6g} <= 0")

    if omega_res == 0.0 or hw_c == 0.0:
        wt = np.sqrt(wt2)
        s = np.sqrt(hw_nu / wt)
        x_m = 0.5 * s * (1.0 + wt / hw_nu)
        z_m = 0.5 * s * (wt / hw_nu - 1.0)
        hw = np.array(sorted([hw_c, wt]))
        photon_first = hw[0] == hw_c and hw_c != wt
        rows = [
            dict(hw=hw_c, w=1.0 + 0.0j, x=0.0j, y=0.0j, z=0.0j, We=0.0),
            dict(hw=wt, w=0.0j, x=x_m + 0.0j, y=0.0j, z=z_m + 0.0j, We=1.0),
        ]
        if not photon_first:
            rows.reverse()
        return PolaritonSpectrum(
            hw_c=hw_c,
            hw=np.array([r["hw"] for r in rows]),
            w=np.array([r["w"] for r in rows]),
            x=np.array([[r["x"]] for r in rows]),
            y=np.array([r["y"] for r in rows]),
            z=np.array([[r["z"]] for r in rows]),
            We=np.array([r["We"] for r in rows]),
        )

    total = hw_c**2 + wt2
    disc = np.sqrt((hw_c**2 - wt2) ** 2 + 16.0 * omega_res**2 * hw_c**2)
    lam2 = np.array([0.5 * (total - disc), 0.5 * (total + disc)])
    if lam2[0] <= 0:
        raise UnstableSpectrumError(
            f"lower branch frequency squared {lam2[0]:.6g} <= 0: over-critical"
        )
    lam = np.sqrt(lam2)

    omega = omega_res * np.sqrt(hw_c / hw_nu)
    hw_list, wlist, xlist, ylist, zlist, Welist = [], [], [], [], [], []
    for L in lam:
        denom = 4.0 * omega**2 * hw_c / (hw_c**2 - L**2) ** 2 + 1.0 / hw_nu
        s = 1.0 / np.sqrt(L * denom)
        x = 0.5 * s * (1.0 + L / hw_nu)
        z = 0.5 * s * (L / hw_nu - 1.0)
        w = 1j * omega * s / (hw_c - L)
        y = 1j * omega * s / (hw_c + L)
        vec = _phase_fix(np.array([w, x, y, z], dtype=complex))
        hw_list.append(L)
        wlist.append(vec[0])
        xlist.append([vec[1]])
        ylist.append(vec[2])
        zlist.append([vec[3]])
        Welist.append(s**2 * L / hw_nu)
    return PolaritonSpectrum(
        hw_c=hw_c, hw=np.array(hw_list), w=np.array(wlist), x=np.array(xlist),
        y=np.array(ylist), z=np.array(zlist), We=np.array(Welist),
    )


def two_subband_from_catalog(catalog: TransitionCatalog, hw_c: float,
                             l: int, j: int) -> PolaritonSpectrum:
    entry = catalog.entry(l, j)
    return two_subband_solve(hw_c, entry.hw, entry.omega_res, entry.xi_self)


def track_branches(spectra) -> list[PolaritonSpectrum]:
    """Relabel branches along a sweep by maximal eigenvector overlap.

    Prevents sorting artifacts where branches cross or anti-cross: branch k of
    the output keeps its identity across the whole sweep.
    """
    if not spectra:
        return []
    tracked = [spectra[0]]
    for spec in spectra[1:]:
        prev = tracked[-1].vectors()
        cur = spec.vectors()
        overlap = np.abs(prev.conj() @ cur.T)
        _, cols = linear_sum_assignment(-overlap)
        tracked.append(spec.permuted(cols))
    return tracked
