"""Instantaneous feedback laws for the external magnetic field.

Both strategies minimize, over one predicted step, a quadratic cost that
tracks a target radius and radial velocity and penalizes spread and control
effort. Minimization is exact (the predicted step is affine in B), giving a
closed-form field clamped to [-bound, bound]:

    B = clamp( (R_v + R_r) / (gamma + S_v + S_r) )

Strategy one evaluates the R and S terms from control-cell statistics and
yields one value per coarse cell. Strategy two evaluates them per particle
against global means, then reduces to cells by averaging. The h -> 0 limits
of both laws are provided for consistency checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import ParticleEnsemble
from .geometry import ControlPartition, locate_coarse_cell


@dataclass(frozen=True)
class ControlWeights:
    """Cost weights, regularization, bound, and tracking targets.

    alpha_* weight tracking of cell/global means toward the targets, beta_*
    weight the spread around those means, gamma > 0 regularizes the control,
    and bound clamps it. gamma = inf is allowed and forces B = 0 exactly.
    Targets may be scalars or per-cell arrays.
    """

    alpha_r: float = 100.0
    alpha_v: float = 5.0
    beta_r: float = 10.0
    beta_v: float = 5.0
    gamma: float = 1e-4
    bound: float = 100.0
    r_target: float | np.ndarray = 6.5
    v_r_target: float | np.ndarray = 0.0

    def __post_init__(self):
        for name in ("alpha_r", "alpha_v", "beta_r", "beta_v"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.bound > 0.0:
            raise ValueError("control bound must be positive")

    def clamp(self, b):
        return np.clip(b, -self.bound, self.bound)


@dataclass
class CellStatistics:
    """Per-control-cell summaries of the ensemble.

    Means are zero-filled for empty cells; use counts to tell them apart.
    particle_cell holds each particle's flat cell index for reuse downstream.
    """

    counts: np.ndarray
    r_mean: np.ndarray
    v_r_mean: np.ndarray
    v_theta_mean: np.ndarray
    e_r_mean: np.ndarray
    particle_cell: np.ndarray

    @property
    def occupied(self) -> np.ndarray:
        return self.counts > 0


def _cell_mean(values, cell, n_cells, counts):
    sums = np.bincount(cell, weights=values, minlength=n_cells)
    return np.divide(sums, counts, out=np.zeros(n_cells), where=counts > 0)


def cell_statistics(ens: ParticleEnsemble, e_r, partition: ControlPartition) -> CellStatistics:
    """Counts and means of (r, v_r, v_theta, E_r) over the control cells."""
    cell = locate_coarse_cell(ens.r, ens.theta, partition)
    n_c = partition.n_cells
    counts = np.bincount(cell, minlength=n_c).astype(np.float64)
    e_r = np.broadcast_to(np.asarray(e_r, dtype=np.float64), ens.r.shape)
    return CellStatistics(
        counts=counts,
        r_mean=_cell_mean(ens.r, cell, n_c, counts),
        v_r_mean=_cell_mean(ens.v_r, cell, n_c, counts),
        v_theta_mean=_cell_mean(ens.v_theta, cell, n_c, counts),
        e_r_mean=_cell_mean(e_r, cell, n_c, counts),
        particle_cell=cell,
    )


def strategy_one(ens: ParticleEnsemble, e_r, weights: ControlWeights,
                 partition: ControlPartition, h: float,
                 stats: CellStatistics | None = None) -> np.ndarray:
    """Cell-level feedback field, one value per control cell.

    The tracking (alpha) terms push the cell means of the one-step prediction
    toward the targets; the spread (beta) terms damp within-cell deviations
    from the current cell means. Empty cells get B = 0.

    Args:
        ens: current particle state.
        e_r: per-particle radial field at the particle positions.
        weights: cost weights and clamp bound.
        partition: coarse control tiling.
        h: time step used in the one-step prediction.
        stats: optionally reuse precomputed cell statistics.

    Returns:
        Array of length partition.n_cells, clamped to [-bound, bound].
    """
    if stats is None:
        stats = cell_statistics(ens, e_r, partition)
    occ = stats.occupied
    counts = stats.counts
    n_c = partition.n_cells
    e_r = np.broadcast_to(np.asarray(e_r, dtype=np.float64), ens.r.shape)
    r_t = np.broadcast_to(np.asarray(weights.r_target, dtype=np.float64), (n_c,))
    v_t = np.broadcast_to(np.asarray(weights.v_r_target, dtype=np.float64), (n_c,))

    rbar = np.where(occ, stats.r_mean, 1.0)  # placeholder keeps 0/0 out of empties
    vrbar = stats.v_r_mean
    vtbar = stats.v_theta_mean
    erbar = stats.e_r_mean

    # cell-mean one-step predictions without the control term
    pred_v = vrbar + h * vtbar ** 2 / rbar + h * erbar
    pred_r = rbar + h * vrbar + h ** 2 * vtbar ** 2 / rbar + h ** 2 * erbar

    r_v = weights.alpha_v * vtbar * (pred_v - v_t)
    r_r = weights.alpha_r * vtbar * (pred_r - r_t)

    cell = stats.particle_cell
    pred_v_i = ens.v_r + h * ens.v_theta ** 2 / ens.r + h * e_r
    pred_r_i = ens.r + h * ens.v_r + h ** 2 * ens.v_theta ** 2 / ens.r + h ** 2 * e_r
    dev_v = np.bincount(cell, weights=ens.v_theta * (pred_v_i - vrbar[cell]),
                        minlength=n_c)
    dev_r = np.bincount(cell, weights=ens.v_theta * (pred_r_i - stats.r_mean[cell]),
                        minlength=n_c)
    safe_counts = np.where(occ, counts, 1.0)
    r_v = r_v + weights.beta_v * dev_v / safe_counts
    r_r = r_r + weights.beta_r * dev_r / safe_counts

    s_v = h * (weights.alpha_v + weights.beta_v) * vtbar ** 2
    s_r = h ** 2 * (weights.alpha_r + weights.beta_r) * vtbar ** 2

    b = weights.clamp((r_v + r_r) / (weights.gamma + s_v + s_r))
    return np.where(occ, b, 0.0)


def strategy_two_pointwise(ens: ParticleEnsemble, e_r, weights: ControlWeights,
                           h: float, r_mean: float | None = None,
                           v_r_mean: float | None = None,
                           clamp: bool = True) -> np.ndarray:
    """Per-particle feedback field before interpolation onto control cells.

    Same closed form as strategy one but evaluated particle by particle; the
    spread terms measure deviation from the global ensemble means, which may
    be passed in to avoid recomputation.

    With clamp=False the raw feedback values are returned. The per-particle
    values are heavy-tailed (the denominator approaches gamma as v_theta
    vanishes), and their signs follow v_theta, so a cell average of clamped
    values cancels toward zero and the coils stay effectively off. Averaging
    the raw values lets the dominant terms saturate the cell actuator
    instead; the projection then bounds the physical per-cell field.

    Returns:
        Array of length ens.n, clamped to [-bound, bound] unless clamp=False.
    """
    if r_mean is None:
        r_mean = float(ens.r.mean())
    if v_r_mean is None:
        v_r_mean = float(ens.v_r.mean())
    e_r = np.asarray(e_r, dtype=np.float64)
    r_t = np.asarray(weights.r_target, dtype=np.float64)
    v_t = np.asarray(weights.v_r_target, dtype=np.float64)
    if r_t.ndim or v_t.ndim:
        raise ValueError("pointwise strategy expects scalar targets")

    pred_v = ens.v_r + h * ens.v_theta ** 2 / ens.r + h * e_r
    pred_r = ens.r + h * ens.v_r + h ** 2 * ens.v_theta ** 2 / ens.r + h ** 2 * e_r

    r_v = ens.v_theta * (weights.alpha_v * (pred_v - v_t)
                         + weights.beta_v * (pred_v - v_r_mean))
    r_r = ens.v_theta * (weights.alpha_r * (pred_r - r_t)
                         + weights.beta_r * (pred_r - r_mean))

    s_v = h * (weights.alpha_v + weights.beta_v) * ens.v_theta ** 2
    s_r = h ** 2 * (weights.alpha_r + weights.beta_r) * ens.v_theta ** 2
    raw = (r_v + r_r) / (weights.gamma + s_v + s_r)
    return weights.clamp(raw) if clamp else raw


def interpolate_control(b_particles: np.ndarray, ens: ParticleEnsemble,
                        partition: ControlPartition, weights: ControlWeights,
                        cell: np.ndarray | None = None) -> np.ndarray:
    """Reduce per-particle control values to one value per coarse cell.

    Arithmetic mean over the particles inside each cell; empty cells get 0.
    The mean of clamped values cannot leave the clamp interval, but the
    result is projected again so the bound holds by construction.
    """
    if cell is None:
        cell = locate_coarse_cell(ens.r, ens.theta, partition)
    n_c = partition.n_cells
    counts = np.bincount(cell, minlength=n_c).astype(np.float64)
    mean = np.divide(np.bincount(cell, weights=b_particles, minlength=n_c),
                     counts, out=np.zeros(n_c), where=counts > 0)
    return np.where(counts > 0, weights.clamp(mean), 0.0)


def continuous_cell_control(ens: ParticleEnsemble, weights: ControlWeights,
                            partition: ControlPartition,
                            stats: CellStatistics | None = None) -> np.ndarray:
    """h -> 0 limit of strategy one: B = clamp((R_v + R_r)/gamma).

    Used as a consistency oracle; the discrete law converges to this at O(h).
    """
    if stats is None:
        stats = cell_statistics(ens, 0.0, partition)
    occ = stats.occupied
    n_c = partition.n_cells
    r_t = np.broadcast_to(np.asarray(weights.r_target, dtype=np.float64), (n_c,))
    v_t = np.broadcast_to(np.asarray(weights.v_r_target, dtype=np.float64), (n_c,))
    cell = stats.particle_cell
    safe_counts = np.where(occ, stats.counts, 1.0)

    r_v = weights.alpha_v * stats.v_theta_mean * (stats.v_r_mean - v_t)
    r_v = r_v + weights.beta_v * np.bincount(
        cell, weights=ens.v_theta * (ens.v_r - stats.v_r_mean[cell]),
        minlength=n_c) / safe_counts
    r_r = weights.alpha_r * stats.v_theta_mean * (stats.r_mean - r_t)
    r_r = r_r + weights.beta_r * np.bincount(
        cell, weights=ens.v_theta * (ens.r - stats.r_mean[cell]),
        minlength=n_c) / safe_counts

    b = weights.clamp((r_v + r_r) / weights.gamma)
    return np.where(occ, b, 0.0)


def continuous_pointwise_control(ens: ParticleEnsemble, weights: ControlWeights,
                                 r_mean: float | None = None,
                                 v_r_mean: float | None = None) -> np.ndarray:
    """h -> 0 limit of strategy two, per particle."""
    if r_mean is None:
        r_mean = float(ens.r.mean())
    if v_r_mean is None:
        v_r_mean = float(ens.v_r.mean())
    r_v = ens.v_theta * (weights.alpha_v * (ens.v_r - weights.v_r_target)
                         + weights.beta_v * (ens.v_r - v_r_mean))
    r_r = ens.v_theta * (weights.alpha_r * (ens.r - weights.r_target)
                         + weights.beta_r * (ens.r - r_mean))
    return weights.clamp((r_v + r_r) / weights.gamma)
