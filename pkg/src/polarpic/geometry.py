"""Annulus geometry: field grid, control partition, coordinate transforms.

Everything downstream (deposition, field solve, control cells) indexes into the
two tilings defined here, so cell-location semantics are centralized in this
module: radial indices clamp the outer wall into the last cell, angles are
wrapped to [0, 2*pi) before binning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class DomainError(ValueError):
    """A coordinate lies outside the annulus."""


def wrap_angle(theta):
    """Map angles to [0, 2*pi). Works on scalars and arrays."""
    return np.mod(theta, TWO_PI)


@dataclass(frozen=True)
class AnnulusDomain:
    """Annular domain r_min <= r <= r_max, theta periodic."""

    r_min: float = 5.0
    r_max: float = 8.0

    def __post_init__(self):
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError(
                f"annulus needs 0 < r_min < r_max, got [{self.r_min}, {self.r_max}]"
            )

    @property
    def width(self) -> float:
        return self.r_max - self.r_min

    def contains_r(self, r):
        return (np.asarray(r) >= self.r_min) & (np.asarray(r) <= self.r_max)


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on the annulus.

    Args:
        domain: the annulus being tiled.
        m_r: number of radial cells (>= 2).
        m_theta: number of angular cells (>= 4).
    """

    domain: AnnulusDomain
    m_r: int
    m_theta: int

    def __post_init__(self):
        if self.m_r < 2 or self.m_theta < 4:
            raise ValueError(f"grid too coarse: {self.m_r}x{self.m_theta}")

    @property
    def dr(self) -> float:
        return self.domain.width / self.m_r

    @property
    def dtheta(self) -> float:
        return TWO_PI / self.m_theta

    @property
    def r_centers(self) -> np.ndarray:
        return self.domain.r_min + (np.arange(self.m_r) + 0.5) * self.dr

    @property
    def r_edges(self) -> np.ndarray:
        return self.domain.r_min + np.arange(self.m_r + 1) * self.dr

    @property
    def theta_centers(self) -> np.ndarray:
        return (np.arange(self.m_theta) + 0.5) * self.dtheta

    @property
    def cell_areas(self) -> np.ndarray:
        """Polar cell areas r_i * dr * dtheta, shape (m_r,)."""
        return self.r_centers * self.dr * self.dtheta


@dataclass(frozen=True)
class ControlPartition:
    """Coarse tiling of the annulus into n_r x n_theta control cells.

    Cells are flattened row-major: k = i_c * n_theta + j_c with i_c the radial
    band and j_c the angular sector, both 0-based.
    """

    domain: AnnulusDomain
    n_r: int = 4
    n_theta: int = 1

    def __post_init__(self):
        if self.n_r < 1 or self.n_theta < 1:
            raise ValueError(f"partition needs at least one cell per direction")

    @property
    def n_cells(self) -> int:
        return self.n_r * self.n_theta

    @property
    def dr(self) -> float:
        return self.domain.width / self.n_r

    @property
    def dtheta(self) -> float:
        return TWO_PI / self.n_theta

    def validate_against(self, grid: GridSpec) -> None:
        """Control cells must not be finer than the field grid."""
        if self.n_r > grid.m_r or self.n_theta > grid.m_theta:
            raise ValueError(
                f"control partition {self.n_r}x{self.n_theta} finer than "
                f"field grid {grid.m_r}x{grid.m_theta}"
            )


def _locate(r, theta, r_min, r_max, dr, dtheta, n_r, n_theta):
    r = np.asarray(r)
    if np.any((r < r_min) | (r > r_max)):
        bad = np.asarray(r)[(np.asarray(r) < r_min) | (np.asarray(r) > r_max)]
        raise DomainError(f"radius outside [{r_min}, {r_max}]: {np.ravel(bad)[:5]}")
    # clamp so r == r_max lands in the last radial cell
    i = np.minimum((np.floor((r - r_min) / dr)).astype(np.intp), n_r - 1)
    # mod guards the float edge where wrap_angle returns a value within one ulp of 2*pi
    j = (np.floor(wrap_angle(theta) / dtheta)).astype(np.intp) % n_theta
    return i, j


def locate_fine_cell(r, theta, grid: GridSpec):
    """Indices (i, j) of the field-grid cell containing each point.

    Args:
        r, theta: scalars or arrays of polar coordinates; r must lie in the
            domain, theta may be any real angle.
        grid: field grid.

    Returns:
        Integer arrays (i, j), radial and angular cell indices.

    Raises:
        DomainError: if any radius is outside the annulus.
    """
    d = grid.domain
    return _locate(r, theta, d.r_min, d.r_max, grid.dr, grid.dtheta,
                   grid.m_r, grid.m_theta)


def locate_coarse_cell(r, theta, partition: ControlPartition):
    """Flat control-cell index k for each point (row-major over bands, sectors)."""
    d = partition.domain
    i, j = _locate(r, theta, d.r_min, d.r_max, partition.dr, partition.dtheta,
                   partition.n_r, partition.n_theta)
    return i * partition.n_theta + j


def polar_to_cartesian(r, theta, v_r, v_theta):
    """Positions and velocities from polar to Cartesian components."""
    c, s = np.cos(theta), np.sin(theta)
    x = r * c
    y = r * s
    v_x = v_r * c - v_theta * s
    v_y = v_r * s + v_theta * c
    return x, y, v_x, v_y


def cartesian_to_polar(x, y, v_x, v_y):
    """Inverse of :func:`polar_to_cartesian`; theta comes back in [0, 2*pi)."""
    r = np.hypot(x, y)
    theta = wrap_angle(np.arctan2(y, x))
    v_r = (x * v_x + y * v_y) / r
    v_theta = (x * v_y - y * v_x) / r
    return r, theta, v_r, v_theta
