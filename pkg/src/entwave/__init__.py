"""entwave: bipartite free-particle wave packets on a periodic grid.

Closed-form entangled Gaussian packets and plane-wave pairs, split-step
spectral Schrodinger evolution, information metrics (step-summed relative
entropy and its Fisher-rate continuum limit), the Bohm quantum potential,
and Schmidt/purity entanglement analysis, plus a scenario runner and a
verification suite exercising all of it.
"""

from .core import (
    DensityField,
    PacketParams,
    PreconditionError,
    SpatialGrid,
    WaveField,
    make_grid,
    marginal,
    normalize,
)
from .analytic import (
    BipartiteScenario,
    entangled_joint_density,
    entangled_joint_wavefunction,
    gaussian_density,
    gaussian_packet,
    joint_density_field,
    mixed_joint_density,
    mixture_branches,
    packet_wavefield,
    planewave_state,
    scenario_wavefield,
)
from .fluctuations import KernelSpec, analytic_uncertainty_product, kernel_pdf, sample, uncertainty_product
from .infometrics import (
    DensityTrajectory,
    bohm_potential,
    fisher_rate,
    functional_gradient_check,
    i_f_continuum,
    i_f_discrete,
    kl_divergence,
)
from .solver import (
    EvolutionSpec,
    WaveTrajectory,
    energy_expectation,
    evolve,
    madelung_decompose,
    residuals,
    time_reverse_check,
)
from .entanglement import (
    EntanglementReport,
    ReducedDensity,
    analyze_state,
    brute_force_purity,
    purity,
    reduced_density,
    schmidt_spectrum,
    separability_test,
)

__version__ = "0.1.0"
