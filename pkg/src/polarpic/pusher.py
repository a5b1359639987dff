"""Semi-implicit particle update in polar coordinates.

One step of the equations of motion

    dr/dt      = v_r
    dtheta/dt  = v_theta / r
    dv_r/dt    = E_r + v_theta * (B + v_theta / r)
    dv_theta/dt = E_theta - v_r * (B + v_theta / r)

with the rotation coefficient a = h*(B + v_theta/r) frozen at the old state,
which makes the velocity update linear and solvable in closed form. The
update order (v_theta, v_r, r, theta) is part of the scheme; permuting it
changes the result at O(h) and breaks time convergence.
"""

from __future__ import annotations

import numpy as np

from .ensemble import ParticleEnsemble, apply_boundaries
from .errors import IntegrationInstabilityError
from .geometry import AnnulusDomain


def push(ens: ParticleEnsemble, e_r, e_theta, b, h: float,
         domain: AnnulusDomain) -> ParticleEnsemble:
    """Advance the ensemble by one step of size h and apply wall/periodic rules.

    Args:
        ens: current state (not modified).
        e_r, e_theta: per-particle field components (scalars broadcast).
        b: per-particle magnetic field values (scalar broadcasts).
        h: time step, > 0.
        domain: annulus for the boundary treatment.

    Returns:
        A new ensemble at the advanced time.

    Raises:
        IntegrationInstabilityError: if any radius leaves the positive half-line
            or overshoots the annulus by more than one domain width.
    """
    if h <= 0.0:
        raise ValueError("time step must be positive")
    a = h * (b + ens.v_theta / ens.r)
    v_theta = (ens.v_theta + h * e_theta - a * (ens.v_r + h * e_r)) / (1.0 + a * a)
    v_r = ens.v_r + h * e_r + a * v_theta
    r = ens.r + h * v_r
    if np.any(r <= 0.0):
        raise IntegrationInstabilityError(
            "radius crossed zero in one step; reduce the time step")
    theta = ens.theta + h * v_theta / r
    out = ParticleEnsemble(r, theta, v_r, v_theta)
    return apply_boundaries(out, domain)
