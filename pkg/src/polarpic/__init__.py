"""Particle-in-cell solver on an annulus with feedback-controlled confinement.

A 2D polar Vlasov-Poisson system is integrated with a semi-implicit particle
pusher, a spectral/tridiagonal Poisson solve, and nearest-grid-point
deposition and gather. An external axial magnetic field, piecewise constant
on a coarse control partition, can be set each step by one of two
instantaneous feedback laws that track a target ring.
"""

from .control import (ControlWeights, cell_statistics, continuous_cell_control,
                      continuous_pointwise_control, interpolate_control,
                      strategy_one, strategy_two_pointwise)
from .diagnostics import (boundary_thermal_energy, cost_terms, mode_amplitude,
                          state_error)
from .driver import (PRESETS, RunConfig, RunResult, convergence_study,
                     preset_config, read_diagnostics, read_density_snapshot,
                     run)
from .ensemble import (ParticleEnsemble, RingDistribution, apply_boundaries,
                       sample_ring)
from .errors import ConfigError, IntegrationInstabilityError
from .field import (PoissonSolver, compute_efield, deposit_density,
                    gather_field, solve_poisson)
from .geometry import (AnnulusDomain, ControlPartition, DomainError, GridSpec,
                       cartesian_to_polar, locate_coarse_cell,
                       locate_fine_cell, polar_to_cartesian, wrap_angle)
from .pusher import push

__version__ = "0.1.0"
