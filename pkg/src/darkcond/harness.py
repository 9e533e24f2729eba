"""Sweep orchestration and machine-readable output.

Each run verb builds the pipeline (grid -> potential -> subbands -> Fermi sea
-> transition catalog) once, evaluates the requested sweep, and returns a
RunReport plus CSV rows. Sweep points are independent and may be evaluated by
a thread pool; the report always lists them in sweep order. All CSV floats
are written with a fixed %.12g format so identical configs produce
byte-identical files.
"""

from __future__ import annotations

import dataclasses
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import SweepConfig
from .couplings import TransitionCatalog, build_catalog
from .kubo import (
    conductance_interacting,
    conductance_noninteracting,
    dominant_transition,
    limit_conductances,
    two_subband_conductance,
)
from .occupancy import OccupancySpec, SubbandPopulations, fermi_level
from .polariton import (
    UnstableSpectrumError,
    scattering_time,
    solve_polaritons,
    track_branches,
)
from .structure import Grid, PotentialProfile, SubbandBasis, build_potential, \
    evenly_spaced_wells, solve_subbands

WORKERS_ENV = "DARKCOND_WORKERS"
# cavity energy used as the "omega_c -> 0" reference, in units of the sweep unit
ZERO_LIMIT_FRACTION = 1.0e-3

CAVITY_CSV_HEADER = ["omega_c_over_w21", "G_S", "G_NI_S", "G_over_G0",
                     "G_2sb_over_G0", "n_branches", "min_We", "flagged"]
SPECTRUM_CSV_HEADER = ["omega_c_meV", "branch", "omega_I_meV", "W_e", "tau_ps"]
TAU_CSV_HEADER = ["tau0_ps", "omega_c_over_w21", "G_S", "G_NI_S", "G_over_G0",
                  "log10_G_over_G0", "flagged"]
MULTIWELL_CSV_HEADER = ["n_qw", "omega_c_over_wref", "omega_c_meV", "G_S",
                        "G_over_G0", "flagged"]
CONVERGE_CSV_HEADER = ["n_subbands", "G_S", "rel_change", "converged"]


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_points(fn, items, workers):
    workers = workers or default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class Pipeline:
    """Solved structure shared by every point of a sweep."""

    config: SweepConfig
    grid: Grid
    potential: PotentialProfile
    basis: SubbandBasis
    populations: SubbandPopulations
    catalog: TransitionCatalog
    hw21: float     # first transition energy E_2 - E_1, meV

    def hw_c_from(self, value: float, unit: str) -> float:
        return value * self.hw21 if unit == "w21" else value


def build_pipeline(config: SweepConfig, n_qw: int | None = None) -> Pipeline:
    """Solve the pipeline; n_qw switches to the generated multi-well structure."""
    if n_qw is None:
        grid = Grid(n_points=config.n_points, length=config.structure.length)
        potential = build_potential(config.structure.wells, config.structure.barrier, grid)
        occ_spec = config.occupancy.to_spec()
    else:
        mw = config.multiwell
        wells, length = evenly_spaced_wells(n_qw, pitch=mw.pitch, width=mw.width,
                                            depth=mw.depth)
        grid = Grid(n_points=config.n_points, length=length)
        potential = build_potential(wells, config.structure.barrier, grid)
        # Fermi level pinned to the first delocalized subband
        occ_spec = OccupancySpec.pinned(
            n_qw + 1, surface=config.occupancy.surface,
            spin_degeneracy=config.occupancy.spin_degeneracy)
    basis = solve_subbands(potential, config.structure.m_star, config.n_subbands)
    populations = fermi_level(basis, occ_spec)
    catalog = build_catalog(basis, populations, eps_r=config.structure.eps_r,
                            eps_N=config.eps_N)
    if config.decoupled:
        catalog = catalog.decoupled()
    hw21 = float(basis.energies[1] - basis.energies[0])
    return Pipeline(config=config, grid=grid, potential=potential, basis=basis,
                    populations=populations, catalog=catalog, hw21=hw21)


@dataclass
class RunReport:
    """Echoed config, resolved ground state, and per-point results."""

    verb: str
    config: dict
    fermi: dict
    catalog_summary: dict
    rows: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "verb": self.verb,
            "config": self.config,
            "fermi": self.fermi,
            "catalog_summary": self.catalog_summary,
            "rows": self.rows,
            "timings": self.timings,
            "flags": self.flags,
        }

    def to_json(self) -> str:
        import json

        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @property
    def n_flagged(self) -> int:
        return sum(1 for row in self.rows if row.get("flagged"))

    @property
    def all_flagged(self) -> bool:
        return bool(self.rows) and self.n_flagged == len(self.rows)


def _fermi_summary(pipe: Pipeline) -> dict:
    pop = pipe.populations
    return {
        "E_F_meV": pop.E_F,
        "j_F": pop.j_F,
        "n_e_per_cm2": pop.n_e_per_cm2,
        "subband_energies_meV": [float(e) for e in pipe.basis.energies[:max(pop.j_F + 3, 6)]],
        "populations": [float(v) for v in pop.N[:pop.j_F]],
        "spin_degeneracy": pop.spin_degeneracy,
    }


def _catalog_summary(pipe: Pipeline, dominant=None) -> dict:
    cat = pipe.catalog
    out = {
        "n_transitions": cat.n_transitions,
        "hw21_meV": pipe.hw21,
        "eps_r": cat.eps_r,
    }
    if dominant is not None:
        out["dominant_transition"] = [dominant.l, dominant.j]
        out["dominant_hw_meV"] = dominant.hw
        out["dominant_omega_res_over_w"] = dominant.omega_res / dominant.hw
        out["dominant_xi_over_w"] = dominant.xi_self / dominant.hw
    return out


def conductance_at(pipe: Pipeline, hw_c: float, tau0: float | None = None):
    """Spectrum and ConductanceResult at one cavity energy (meV)."""
    tau0 = pipe.config.tau0 if tau0 is None else tau0
    spectrum = solve_polaritons(pipe.catalog, hw_c)
    return spectrum, conductance_interacting(spectrum, pipe.catalog, tau0,
                                             pipe.config.tau_p, with_profile=False)


def run_cavity_sweep(config: SweepConfig, workers: int | None = None) -> RunReport:
    """Conductance vs cavity frequency, with the dominant-transition overlay."""
    if config.sweep.variable != "omega_c":
        from .config import ConfigError

        raise ConfigError("sweep.variable", "sweep-cavity needs variable == 'omega_c'")
    t0 = time.perf_counter()
    pipe = build_pipeline(config)
    t_build = time.perf_counter()

    dom = dominant_transition(pipe.catalog, config.tau0,
                              override=config.dominant_transition)
    lim = limit_conductances(pipe.catalog, dom, config.tau0)
    hw_ref = ZERO_LIMIT_FRACTION * pipe.hw21
    _, res0 = conductance_at(pipe, hw_ref)
    G0 = res0.G
    G0_2sb = lim.G_zero

    points = config.sweep.points()
    hw_cs = [pipe.hw_c_from(v, config.sweep.unit) for v in points]

    def evaluate(idx_hw):
        idx, hw_c = idx_hw
        row = {
            "omega_c_over_w21": hw_c / pipe.hw21,
            "omega_c_meV": hw_c,
            "G_NI_S": conductance_noninteracting(pipe.catalog, config.tau0),
            "flagged": 0,
        }
        try:
            spectrum, res = conductance_at(pipe, hw_c)
            g2 = two_subband_conductance(pipe.catalog, dom, hw_c, config.tau0,
                                         config.tau_p)
            row.update(
                G_S=res.G,
                G_over_G0=res.G / G0,
                G_2sb_over_G0=g2 / G0_2sb,
                n_branches=spectrum.n_branches,
                min_We=float(spectrum.We.min()),
            )
        except UnstableSpectrumError as exc:
            row.update(G_S=float("nan"), G_over_G0=float("nan"),
                       G_2sb_over_G0=float("nan"), n_branches=0,
                       min_We=float("nan"), flagged=1, error=str(exc))
        return row

    rows = _map_points(evaluate, list(enumerate(hw_cs)), workers)
    t_done = time.perf_counter()

    report = RunReport(
        verb="sweep-cavity",
        config=config.to_dict(),
        fermi=_fermi_summary(pipe),
        catalog_summary=_catalog_summary(pipe, dom),
        rows=rows,
        timings={"build_s": t_build - t0, "sweep_s": t_done - t_build},
        flags={"G0_S": G0, "G0_2sb_S": G0_2sb,
               "limits_over_GNI": [lim.ratio_zero, lim.ratio_inf]},
    )
    return report


def run_spectrum(config: SweepConfig, workers: int | None = None) -> RunReport:
    """Polariton branches vs cavity frequency (tracked across the sweep)."""
    if config.sweep.variable != "omega_c":
        from .config import ConfigError

        raise ConfigError("sweep.variable", "spectrum needs variable == 'omega_c'")
    t0 = time.perf_counter()
    pipe = build_pipeline(config)
    t_build = time.perf_counter()
    points = config.sweep.points()
    hw_cs = [pipe.hw_c_from(v, config.sweep.unit) for v in points]

    spectra = _map_points(lambda hw_c: solve_polaritons(pipe.catalog, hw_c),
                          hw_cs, workers)
    spectra = track_branches(spectra)
    rows = []
    for hw_c, spec in zip(hw_cs, spectra):
        taus = scattering_time(spec.We, config.tau0, config.tau_p)
        for r in range(spec.n_branches):
            rows.append({
                "omega_c_meV": hw_c,
                "branch": r + 1,
                "omega_I_meV": float(spec.hw[r]),
                "W_e": float(spec.We[r]),
                "tau_ps": float(taus[r]),
                "flagged": 0,
            })
    t_done = time.perf_counter()
    return RunReport(
        verb="spectrum",
        config=config.to_dict(),
        fermi=_fermi_summary(pipe),
        catalog_summary=_catalog_summary(pipe),
        rows=rows,
        timings={"build_s": t_build - t0, "sweep_s": t_done - t_build},
    )


def run_tau_sweep(config: SweepConfig, workers: int | None = None) -> RunReport:
    """One conductance curve per tau0 value over a shared cavity-frequency axis."""
    from .config import ConfigError

    if config.sweep.variable != "tau0":
        raise ConfigError("sweep.variable", "sweep-tau needs variable == 'tau0'")
    if config.omega_c_axis is None:
        raise ConfigError("omega_c_axis", "sweep-tau needs an omega_c_axis block")
    t0 = time.perf_counter()
    pipe = build_pipeline(config)
    t_build = time.perf_counter()

    taus = config.sweep.points()
    axis = config.omega_c_axis.points()
    hw_cs = [pipe.hw_c_from(v, config.omega_c_axis.unit) for v in axis]
    hw_ref = ZERO_LIMIT_FRACTION * pipe.hw21

    # polariton spectra do not depend on tau0: solve each cavity point once
    def solve_point(hw_c):
        try:
            return solve_polaritons(pipe.catalog, hw_c), None
        except UnstableSpectrumError as exc:
            return None, str(exc)

    spectra = _map_points(solve_point, hw_cs, workers)
    spectrum_ref, err_ref = solve_point(hw_ref)

    rows = []
    for tau0 in taus:
        gni = conductance_noninteracting(pipe.catalog, tau0)
        if spectrum_ref is None:
            G0 = float("nan")
        else:
            G0 = conductance_interacting(spectrum_ref, pipe.catalog, tau0,
                                         config.tau_p, with_profile=False).G
        for hw_c, (spec, err) in zip(hw_cs, spectra):
            row = {"tau0_ps": float(tau0),
                   "omega_c_over_w21": hw_c / pipe.hw21,
                   "G_NI_S": gni, "flagged": 0}
            if spec is None:
                row.update(G_S=float("nan"), G_over_G0=float("nan"),
                           log10_G_over_G0=float("nan"), flagged=1, error=err)
            else:
                res = conductance_interacting(spec, pipe.catalog, tau0,
                                              config.tau_p, with_profile=False)
                ratio = res.G / G0
                row.update(G_S=res.G, G_over_G0=ratio,
                           log10_G_over_G0=float(np.log10(ratio)) if ratio > 0
                           else float("nan"))
            rows.append(row)
    t_done = time.perf_counter()
    return RunReport(
        verb="sweep-tau",
        config=config.to_dict(),
        fermi=_fermi_summary(pipe),
        catalog_summary=_catalog_summary(pipe),
        rows=rows,
        timings={"build_s": t_build - t0, "sweep_s": t_done - t_build},
    )


def run_multiwell(config: SweepConfig, workers: int | None = None) -> RunReport:
    """Normalized conductance curves for different quantum-well counts.

    For each n_qw the spacer is n_qw * pitch long, the Fermi level is pinned
    to the first delocalized subband, and the cavity axis is measured in units
    of the transition from the lowest confined state to that subband.
    """
    from .config import ConfigError

    if config.sweep.variable != "n_qw":
        raise ConfigError("sweep.variable", "multiwell needs variable == 'n_qw'")
    if config.omega_c_axis is None:
        raise ConfigError("omega_c_axis", "multiwell needs an omega_c_axis block")
    t0 = time.perf_counter()
    rows = []
    pipe = None
    for n_qw_f in config.sweep.points():
        n_qw = int(n_qw_f)
        pipe = build_pipeline(config, n_qw=n_qw)
        hw_ref_transition = float(pipe.basis.energies[n_qw] - pipe.basis.energies[0])
        axis = config.omega_c_axis.points()
        hw_cs = [v * hw_ref_transition for v in axis]
        _, res0 = conductance_at(pipe, ZERO_LIMIT_FRACTION * hw_ref_transition)
        G0 = res0.G

        def evaluate(hw_c):
            row = {"n_qw": n_qw, "omega_c_over_wref": hw_c / hw_ref_transition,
                   "omega_c_meV": hw_c, "flagged": 0}
            try:
                _, res = conductance_at(pipe, hw_c)
                row.update(G_S=res.G, G_over_G0=res.G / G0)
            except UnstableSpectrumError as exc:
                row.update(G_S=float("nan"), G_over_G0=float("nan"), flagged=1,
                           error=str(exc))
            return row

        rows.extend(_map_points(evaluate, hw_cs, workers))
    t_done = time.perf_counter()
    return RunReport(
        verb="multiwell",
        config=config.to_dict(),
        fermi=_fermi_summary(pipe),
        catalog_summary=_catalog_summary(pipe),
        rows=rows,
        timings={"total_s": t_done - t0},
    )


def run_convergence(config: SweepConfig, workers: int | None = None) -> RunReport:
    """Conductance at fixed omega_c vs the number of retained subbands."""
    from .config import ConfigError

    if config.sweep.variable != "n_subbands":
        raise ConfigError("sweep.variable", "converge needs variable == 'n_subbands'")
    if config.omega_c is None:
        raise ConfigError("omega_c", "converge needs a fixed omega_c block")
    counts = [int(v) for v in config.sweep.points()]
    if counts != sorted(counts):
        raise ConfigError("sweep.values", "n_subbands values must be ascending")

    t0 = time.perf_counter()
    base = dataclasses.replace(config, n_subbands=max(counts))
    pipe_full = build_pipeline(base)
    hw_c = pipe_full.hw_c_from(config.omega_c.value, config.omega_c.unit)

    rows = []
    previous = None
    converged_at = None
    for count in counts:
        basis = pipe_full.basis.truncated(count)
        populations = fermi_level(basis, config.occupancy.to_spec())
        catalog = build_catalog(basis, populations, eps_r=config.structure.eps_r,
                                eps_N=config.eps_N)
        if config.decoupled:
            catalog = catalog.decoupled()
        spectrum = solve_polaritons(catalog, hw_c)
        G = conductance_interacting(spectrum, catalog, config.tau0, config.tau_p,
                                    with_profile=False).G
        rel = abs(G - previous) / abs(previous) if previous is not None else float("nan")
        is_conv = previous is not None and rel < 0.01
        if is_conv and converged_at is None:
            converged_at = count
        rows.append({"n_subbands": count, "G_S": G,
                     "rel_change": rel, "converged": int(bool(is_conv)),
                     "flagged": 0})
        previous = G
    t_done = time.perf_counter()
    return RunReport(
        verb="converge",
        config=config.to_dict(),
        fermi=_fermi_summary(pipe_full),
        catalog_summary=_catalog_summary(pipe_full),
        rows=rows,
        timings={"total_s": t_done - t0},
        flags={"converged_at": converged_at, "omega_c_meV": hw_c},
    )


RUNNERS = {
    "spectrum": (run_spectrum, SPECTRUM_CSV_HEADER),
    "sweep-cavity": (run_cavity_sweep, CAVITY_CSV_HEADER),
    "sweep-tau": (run_tau_sweep, TAU_CSV_HEADER),
    "multiwell": (run_multiwell, MULTIWELL_CSV_HEADER),
    "converge": (run_convergence, CONVERGE_CSV_HEADER),
}


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_value(row.get(col, float("nan")))
                              for col in header) + "\n")


def dump_basis_csv(path, basis: SubbandBasis, potential: PotentialProfile) -> None:
    header = ["z_nm", "V_meV"] + [f"phi_{j}" for j in range(1, basis.n_subbands + 1)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        z = basis.grid.z
        for k in range(basis.grid.n_points):
            vals = [z[k], potential.values[k]] + [basis.phi[j, k]
                                                  for j in range(basis.n_subbands)]
            fh.write(",".join(f"{v:.12g}" for v in vals) + "\n")


def dump_catalog_csv(path, catalog: TransitionCatalog) -> None:
    header = ["l", "j", "hw_meV", "N_nu", "Omega_res_meV", "Xi_diag_meV"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for t in catalog.entries:
            fh.write(",".join([str(t.l), str(t.j), f"{t.hw:.12g}", f"{t.N:.12g}",
                               f"{t.omega_res:.12g}", f"{t.xi_self:.12g}"]) + "\n")
