"""Field stage: charge deposition, polar Poisson solve, electric field, gather.

The potential solve is spectral in theta (real FFT, the grid is periodic) and
a direct tridiagonal solve per angular mode in r. Homogeneous Dirichlet walls
are imposed through odd-reflection ghost cells, which keeps the scheme second
order on the cell-centered grid.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .ensemble import ParticleEnsemble
from .geometry import GridSpec, locate_fine_cell


def deposit_density(ens: ParticleEnsemble, grid: GridSpec) -> np.ndarray:
    """Nearest-grid-point charge density, shape (m_r, m_theta).

    Each particle carries weight 1/n and lands entirely in its containing
    cell; the count is divided by the polar cell area so that
    sum(rho * r_i * dr * dtheta) equals the in-domain particle fraction.
    """
    i, j = locate_fine_cell(ens.r, ens.theta, grid)
    counts = np.bincount(i * grid.m_theta + j, minlength=grid.m_r * grid.m_theta)
    counts = counts.reshape(grid.m_r, grid.m_theta).astype(np.float64)
    return counts / (ens.n * grid.cell_areas[:, None])


def gather_field(ens: ParticleEnsemble, e_r: np.ndarray, e_theta: np.ndarray,
                 grid: GridSpec):
    """Per-particle field values from the particle's own cell (NGP gather).

    Returns:
        (e_r_p, e_theta_p): arrays of length ens.n.
    """
    i, j = locate_fine_cell(ens.r, ens.theta, grid)
    return e_r[i, j], e_theta[i, j]


class PoissonSolver:
    """Factorization-free fast solver for the polar Poisson problem.

    Solves (1/r) d_r(r d_r phi) + (1/r^2) d_theta^2 phi = -rho with
    phi = 0 on both radial walls and periodic theta, discretized with the
    conservative 5-point stencil on cell centers. Band matrices for every
    angular mode are prebuilt, so repeated solves on one grid are cheap.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        m_r = grid.m_r
        r_c = grid.r_centers
        r_e = grid.r_edges
        dr2 = grid.dr ** 2

        # flux coefficients r_{i +/- 1/2} / (r_i dr^2)
        c_lo = r_e[:-1] / (r_c * dr2)
        c_hi = r_e[1:] / (r_c * dr2)
        diag = -(c_lo + c_hi)
        # odd-reflection ghosts: phi_{-1} = -phi_0, phi_{m_r} = -phi_{m_r-1}
        diag = diag.copy()
        diag[0] -= c_lo[0]
        diag[-1] -= c_hi[-1]

        # exact eigenvalues of the periodic second difference in theta
        q = np.arange(grid.m_theta // 2 + 1)
        lam = (2.0 - 2.0 * np.cos(q * grid.dtheta)) / grid.dtheta ** 2

        self._bands = np.zeros((len(q), 3, m_r))
        for qi in range(len(q)):
            self._bands[qi, 0, 1:] = c_hi[:-1]          # superdiagonal
            self._bands[qi, 1, :] = diag - lam[qi] / r_c ** 2
            self._bands[qi, 2, :-1] = c_lo[1:]          # subdiagonal
        self._c_lo = c_lo
        self._c_hi = c_hi

    def solve(self, rho: np.ndarray) -> np.ndarray:
        """Potential phi with the same (m_r, m_theta) shape as rho."""
        grid = self.grid
        if rho.shape != (grid.m_r, grid.m_theta):
            raise ValueError(f"rho shape {rho.shape} does not match grid")
        rho_hat = np.fft.rfft(rho, axis=1)
        phi_hat = np.empty_like(rho_hat)
        for qi in range(rho_hat.shape[1]):
            phi_hat[:, qi] = solve_banded((1, 1), self._bands[qi], -rho_hat[:, qi],
                                          check_finite=False)
        return np.fft.irfft(phi_hat, n=grid.m_theta, axis=1)

    def apply_operator(self, phi: np.ndarray) -> np.ndarray:
        """Discrete Laplacian of phi (same stencil and ghosts as the solve)."""
        c_lo = self._c_lo[:, None]
        c_hi = self._c_hi[:, None]
        up = np.empty_like(phi)
        down = np.empty_like(phi)
        up[:-1] = phi[1:]
        up[-1] = -phi[-1]
        down[1:] = phi[:-1]
        down[0] = -phi[0]
        radial = c_hi * (up - phi) - c_lo * (phi - down)
        ang = (np.roll(phi, -1, axis=1) - 2.0 * phi + np.roll(phi, 1, axis=1))
        ang /= (self.grid.r_centers[:, None] * self.grid.dtheta) ** 2
        return radial + ang

    def residual(self, phi: np.ndarray, rho: np.ndarray) -> float:
        """Max-norm residual |L(phi) + rho|; solver output stays near roundoff."""
        return float(np.abs(self.apply_operator(phi) + rho).max())


def solve_poisson(rho: np.ndarray, grid: GridSpec) -> np.ndarray:
    """One-shot wrapper around PoissonSolver for callers without state."""
    return PoissonSolver(grid).solve(rho)


def compute_efield(phi: np.ndarray, grid: GridSpec):
    """E = -grad(phi) on cell centers.

    Central differences inside, one-sided 3-point second-order stencils on the
    first and last radial rows (these use interior values only, so a constant
    potential maps to an exactly zero field).

    Returns:
        (e_r, e_theta): arrays shaped like phi.
    """
    dr = grid.dr
    e_r = np.empty_like(phi)
    e_r[1:-1] = -(phi[2:] - phi[:-2]) / (2.0 * dr)
    if grid.m_r >= 3:
        e_r[0] = -(-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * dr)
        e_r[-1] = -(3.0 * phi[-1] - 4.0 * phi[-2] + phi[-3]) / (2.0 * dr)
    else:
        e_r[0] = e_r[-1] = -(phi[1] - phi[0]) / dr

    dphi = np.roll(phi, -1, axis=1) - np.roll(phi, 1, axis=1)
    e_theta = -dphi / (2.0 * grid.dtheta * grid.r_centers[:, None])
    return e_r, e_theta
