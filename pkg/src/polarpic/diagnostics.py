"""Run diagnostics: wall-layer thermal energy, cost summands, error norms.

These are observers only; nothing here feeds back into the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import ControlWeights
from .ensemble import ParticleEnsemble
from .geometry import ControlPartition, GridSpec, locate_coarse_cell, locate_fine_cell


def boundary_thermal_energy(ens: ParticleEnsemble, grid: GridSpec):
    """Thermal energy of the particles in the two wall-adjacent cell rings.

    The band is the innermost plus outermost radial cell ring; the reference
    velocity is the mean velocity of the band population (zero when the band
    is empty), so a rigid translation of all velocities leaves the value
    unchanged.

    Returns:
        (e_b, u_b, rho_b): scalar energy, mean-velocity pair
        (u_r, u_theta), and normalized band density.
    """
    i, _ = locate_fine_cell(ens.r, ens.theta, grid)
    mask = (i == 0) | (i == grid.m_r - 1)
    n_band_cells = 2 * grid.m_theta
    count = int(mask.sum())
    norm = ens.n * n_band_cells
    rho_b = count / norm
    if count == 0:
        return 0.0, (0.0, 0.0), 0.0
    u_r = float(ens.v_r[mask].mean())
    u_theta = float(ens.v_theta[mask].mean())
    spread = (ens.v_r[mask] - u_r) ** 2 + (ens.v_theta[mask] - u_theta) ** 2
    e_b = float(spread.sum()) / (2.0 * norm)
    return e_b, (u_r, u_theta), rho_b


@dataclass(frozen=True)
class CostTerms:
    """The five cost summands of one step, reported separately."""

    j_pos: float      # tracking of mean radius
    j_posvar: float   # radial spread
    j_vel: float      # tracking of mean radial velocity
    j_velvar: float   # radial-velocity spread
    j_ctrl: float     # control penalty (h*gamma/2) * sum(B^2)

    @property
    def total(self) -> float:
        return self.j_pos + self.j_posvar + self.j_vel + self.j_velvar + self.j_ctrl


def cost_terms(ens: ParticleEnsemble, weights: ControlWeights, h: float,
               b_values: np.ndarray,
               partition: ControlPartition | None = None) -> CostTerms:
    """Evaluate the running cost on the current state.

    With a partition, tracking and spread are computed cell by cell against
    the cell means (the form minimized by the cell-level strategy) and
    b_values must hold one control value per cell. Without a partition the
    per-particle form is used: tracking of every particle against the global
    targets, spread against the global means, summed over particles, and
    b_values may have any length (per particle or per cell).

    Returns:
        CostTerms with the five summands.
    """
    b_values = np.asarray(b_values, dtype=np.float64)
    j_ctrl = 0.5 * h * weights.gamma * float((b_values ** 2).sum())

    if partition is None:
        r_t = float(weights.r_target)
        v_t = float(weights.v_r_target)
        r_mean = float(ens.r.mean())
        v_mean = float(ens.v_r.mean())
        j_pos = 0.5 * h * weights.alpha_r * float(((ens.r - r_t) ** 2).sum())
        j_posvar = 0.5 * h * weights.beta_r * float(((ens.r - r_mean) ** 2).sum())
        j_vel = 0.5 * h * weights.alpha_v * float(((ens.v_r - v_t) ** 2).sum())
        j_velvar = 0.5 * h * weights.beta_v * float(((ens.v_r - v_mean) ** 2).sum())
        return CostTerms(j_pos, j_posvar, j_vel, j_velvar, j_ctrl)

    n_c = partition.n_cells
    if b_values.shape != (n_c,):
        raise ValueError(f"need one control value per cell, got {b_values.shape}")
    cell = locate_coarse_cell(ens.r, ens.theta, partition)
    counts = np.bincount(cell, minlength=n_c).astype(np.float64)
    occ = counts > 0
    safe = np.where(occ, counts, 1.0)
    r_mean = np.bincount(cell, weights=ens.r, minlength=n_c) / safe
    v_mean = np.bincount(cell, weights=ens.v_r, minlength=n_c) / safe
    r_t = np.broadcast_to(np.asarray(weights.r_target, dtype=np.float64), (n_c,))
    v_t = np.broadcast_to(np.asarray(weights.v_r_target, dtype=np.float64), (n_c,))

    j_pos = 0.5 * h * weights.alpha_r * float(((r_mean - r_t) ** 2)[occ].sum())
    j_vel = 0.5 * h * weights.alpha_v * float(((v_mean - v_t) ** 2)[occ].sum())
    var_r = np.bincount(cell, weights=(ens.r - r_mean[cell]) ** 2, minlength=n_c)
    var_v = np.bincount(cell, weights=(ens.v_r - v_mean[cell]) ** 2, minlength=n_c)
    j_posvar = 0.5 * h * weights.beta_r * float((var_r / safe)[occ].sum())
    j_velvar = 0.5 * h * weights.beta_v * float((var_v / safe)[occ].sum())
    return CostTerms(j_pos, j_posvar, j_vel, j_velvar, j_ctrl)


def angular_distance(a, b):
    """Shortest distance between angles, in [0, pi]."""
    d = np.abs(np.mod(a - b, 2.0 * np.pi))
    return np.minimum(d, 2.0 * np.pi - d)


def state_error(ref: ParticleEnsemble, other: ParticleEnsemble) -> float:
    """Max-norm discrepancy between two ensembles of the same size.

    The maximum over all particles and all four state components, with the
    angle compared by shortest angular distance. Used for time-convergence
    studies against a fine-step reference.
    """
    if ref.n != other.n:
        raise ValueError(f"ensemble sizes differ: {ref.n} vs {other.n}")
    errs = (
        np.abs(ref.r - other.r).max(),
        angular_distance(ref.theta, other.theta).max(),
        np.abs(ref.v_r - other.v_r).max(),
        np.abs(ref.v_theta - other.v_theta).max(),
    )
    return float(max(errs))


def mode_amplitude(rho: np.ndarray, grid: GridSpec, k: int) -> float:
    """Magnitude of the k-th angular Fourier coefficient of the cell masses.

    amp = | sum_ij rho_ij * r_i * dr * dtheta * exp(-i k theta_j) |.
    An axisymmetric density gives ~0; a relative cos(k theta) modulation of
    size a gives a/2 times the total mass.
    """
    masses = (rho * grid.cell_areas[:, None]).sum(axis=0)
    phase = np.exp(-1j * k * grid.theta_centers)
    return float(np.abs((masses * phase).sum()))
