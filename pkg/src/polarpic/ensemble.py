"""Particle ensemble: storage, initial sampling, wall/periodicity handling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationInstabilityError
from .geometry import AnnulusDomain, TWO_PI, wrap_angle

SNAPSHOT_HEADER = ["r", "theta", "v_r", "v_theta"]


@dataclass
class ParticleEnsemble:
    """Structure-of-arrays particle state, equal uniform weights 1/n.

    All four arrays are float64 of the same length. theta is kept in
    [0, 2*pi) and r inside the domain by :func:`apply_boundaries`.
    """

    r: np.ndarray
    theta: np.ndarray
    v_r: np.ndarray
    v_theta: np.ndarray

    def __post_init__(self):
        n = len(self.r)
        if not (len(self.theta) == len(self.v_r) == len(self.v_theta) == n):
            raise ValueError("ensemble arrays must share one length")
        if n == 0:
            raise ValueError("ensemble needs at least one particle")

    @property
    def n(self) -> int:
        return len(self.r)

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.r.copy(), self.theta.copy(),
                                self.v_r.copy(), self.v_theta.copy())

    def to_csv(self, path) -> None:
        """Debug snapshot, one row per particle. Meant for small n only."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SNAPSHOT_HEADER)
            for row in zip(self.r, self.theta, self.v_r, self.v_theta):
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "ParticleEnsemble":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != SNAPSHOT_HEADER:
                raise ValueError(f"unexpected particle snapshot header: {header}")
            cols = np.array([[float(v) for v in row] for row in reader]).T
        return cls(*cols)


@dataclass(frozen=True)
class RingDistribution:
    """Perturbed Gaussian ring density on the annulus.

    rho0(r, theta) = (1 + amplitude*cos(mode_number*theta))
                     * exp(-falloff*(r - center)^2) / (2*pi)
    Velocities are an independent unit Gaussian in each component.
    """

    center: float = 6.5
    falloff: float = 4.0
    amplitude: float = 0.3
    mode_number: int = 3

    def __post_init__(self):
        if not 0.0 <= self.amplitude < 1.0:
            raise ValueError("perturbation amplitude must be in [0, 1)")
        if self.falloff <= 0.0:
            raise ValueError("radial falloff must be positive")

    def density(self, r, theta):
        ang = 1.0 + self.amplitude * np.cos(self.mode_number * np.asarray(theta))
        rad = np.exp(-self.falloff * (np.asarray(r) - self.center) ** 2)
        return ang * rad / TWO_PI

    def mass(self, domain: AnnulusDomain) -> float:
        """Phase-space mass of f0 = rho0 * exp(-|v|^2/2) over domain x R^2.

        The velocity Gaussian integrates to 2*pi, cancelling the 1/(2*pi) in
        rho0, so this reduces to the closed-form radial integral of
        r*exp(-falloff*(r-center)^2) times the angular factor. Sampled
        particles each carry weight mass/n of the physical charge; the mass-1
        deposited density is rescaled by this value wherever the self-field
        is solved.
        """
        w, c = self.falloff, self.center
        s = math.sqrt(w)
        a, b = domain.r_min - c, domain.r_max - c
        radial = (c * math.sqrt(math.pi / (4.0 * w))
                  * (math.erf(s * b) - math.erf(s * a))
                  + (math.exp(-w * a * a) - math.exp(-w * b * b)) / (2.0 * w))
        # cos(k theta) integrates to zero over a period unless k = 0
        angular = TWO_PI * ((1.0 + self.amplitude) if self.mode_number == 0 else 1.0)
        return angular * radial

    def envelope(self, domain: AnnulusDomain) -> float:
        """Tight constant bound on density * r over the domain (rejection envelope)."""
        # stationary point of r*exp(-w(r-c)^2): w r^2 - w c r - 1/2 = 0
        w, c = self.falloff, self.center
        r_star = (w * c + np.sqrt((w * c) ** 2 + 2.0 * w)) / (2.0 * w)
        r_star = min(max(r_star, domain.r_min), domain.r_max)
        candidates = [r_star, domain.r_min, domain.r_max]
        peak = max(r * np.exp(-w * (r - c) ** 2) for r in candidates)
        return (1.0 + self.amplitude) * peak / TWO_PI


def sample_ring(dist: RingDistribution, n: int, domain: AnnulusDomain,
                seed: int) -> ParticleEnsemble:
    """Draw n particles from dist (positions) x unit Gaussian (velocities).

    Positions come from constant-envelope rejection sampling of
    rho0(r, theta) * r, so the polar area element is accounted for.
    Deterministic for a given (dist, n, domain, seed).

    Args:
        dist: target spatial density.
        n: number of particles, > 0.
        domain: annulus to sample on.
        seed: RNG seed (numpy default_rng).

    Returns:
        A fresh ParticleEnsemble with all particles inside the domain.
    """
    if n <= 0:
        raise ValueError("need a positive particle count")
    rng = np.random.default_rng(seed)
    env = dist.envelope(domain)

    r_parts = np.empty(n)
    theta_parts = np.empty(n)
    got = 0
    while got < n:
        # ~11% acceptance for the default ring; oversize the batch accordingly
        batch = max(4096, int(10.5 * (n - got)))
        r_try = rng.uniform(domain.r_min, domain.r_max, size=batch)
        theta_try = rng.uniform(0.0, TWO_PI, size=batch)
        u = rng.uniform(0.0, env, size=batch)
        keep = u < dist.density(r_try, theta_try) * r_try
        take = min(int(keep.sum()), n - got)
        r_parts[got:got + take] = r_try[keep][:take]
        theta_parts[got:got + take] = theta_try[keep][:take]
        got += take

    v_r = rng.standard_normal(n)
    v_theta = rng.standard_normal(n)
    return ParticleEnsemble(r_parts, theta_parts, v_r, v_theta)


def apply_boundaries(ens: ParticleEnsemble, domain: AnnulusDomain) -> ParticleEnsemble:
    """Wrap theta and reflect radial wall crossings, in place.

    Specular reflection: r -> 2*r_wall - r, v_r -> -v_r. A particle thrown
    further than one full annulus width past a wall indicates a blown-up step
    and raises instead of reflecting repeatedly.

    Returns:
        The same ensemble object, mutated.
    """
    r, v_r = ens.r, ens.v_r
    lo, hi = domain.r_min, domain.r_max

    over = r - hi
    under = lo - r
    worst = max(float(over.max(initial=0.0)), float(under.max(initial=0.0)))
    if worst > domain.width:
        raise IntegrationInstabilityError(
            f"particle left the annulus by {worst:.3g} (> width {domain.width:.3g}) "
            "in one step; reduce the time step"
        )

    out_hi = over > 0.0
    if out_hi.any():
        r[out_hi] = 2.0 * hi - r[out_hi]
        v_r[out_hi] = -v_r[out_hi]
    out_lo = under > 0.0
    if out_lo.any():
        r[out_lo] = 2.0 * lo - r[out_lo]
        v_r[out_lo] = -v_r[out_lo]

    ens.theta = wrap_angle(ens.theta)
    return ens
