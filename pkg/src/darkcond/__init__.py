"""darkcond: dark vertical conductance of cavity-embedded heterostructures.

Pipeline: build_potential -> solve_subbands -> fermi_level -> build_catalog
-> solve_polaritons -> conductance_interacting. The harness module wraps the
pipeline in declarative sweep runs; the cli module exposes it as a command.
"""

from .config import ConfigError, SweepConfig, load_config, parse_config
from .constants import HBAR, HBAR2_OVER_2ME
from .couplings import (
    Transition,
    TransitionCatalog,
    build_catalog,
    cauchy_schwarz_slack,
    depolarization_matrix,
    rabi,
    xi,
)
from .harness import (
    RunReport,
    build_pipeline,
    run_cavity_sweep,
    run_convergence,
    run_multiwell,
    run_spectrum,
    run_tau_sweep,
)
from .kubo import (
    ConductanceResult,
    LimitConductances,
    ResponseKernel,
    chi_interacting,
    chi_noninteracting,
    conductance_interacting,
    conductance_noninteracting,
    current_profile,
    dominant_transition,
    limit_conductances,
    two_subband_conductance,
    two_subband_limit_ratios,
    xi_eff,
)
from .occupancy import (
    OccupancySpec,
    SubbandPopulations,
    density_of_states,
    enumerate_transitions,
    fermi_level,
)
from .polariton import (
    PolaritonSpectrum,
    UnstableSpectrumError,
    build_matrix,
    diagonalize,
    electronic_weight,
    scattering_time,
    solve_polaritons,
    track_branches,
    two_subband_solve,
)
from .structure import (
    Grid,
    PotentialProfile,
    SubbandBasis,
    StructureError,
    Well,
    build_potential,
    derivative,
    evenly_spaced_wells,
    integrate,
    solve_subbands,
)

__version__ = "0.1.0"
