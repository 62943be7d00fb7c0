"""Gas law, periodic grid and state conversions for the isentropic Euler system.

All state arrays follow the same convention: the last axis runs over grid
cells, leading axes (if any) index independent realizations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy.special import gammaln

NORMALIZED = "normalized"
SHALLOW_WATER = "shallow_water"


class DomainError(ValueError):
    """Raised when an argument lies outside the admissible state space."""


@dataclass(frozen=True)
class GasLaw:
    """Pressure law ``p(rho) = a * rho**gamma``.

    In ``normalized`` mode ``a = theta**2 / gamma`` so that the kinetic
    entropy representation applies verbatim. In ``shallow_water`` mode
    ``gamma = 2`` and ``a = g / 2``.
    """

    gamma: float
    pressure_coeff: float
    mode: Literal["normalized", "shallow_water"] = NORMALIZED

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")
        if not self.pressure_coeff > 0.0:
            raise DomainError("pressure coefficient must be positive")
        if self.mode not in (NORMALIZED, SHALLOW_WATER):
            raise DomainError(f"unknown pressure mode {self.mode!r}")
        if not self.lam > -0.5:
            # (1 - z^2)^lambda must stay integrable against z^2 weights as well
            raise DomainError(f"gamma={self.gamma} gives lambda <= -1/2")

    @classmethod
    def normalized(cls, gamma: float) -> "GasLaw":
        theta = 0.5 * (gamma - 1.0)
        return cls(gamma, theta * theta / gamma, NORMALIZED)

    @classmethod
    def shallow_water(cls, gravity: float) -> "GasLaw":
        return cls(2.0, 0.5 * gravity, SHALLOW_WATER)

    @property
    def theta(self) -> float:
        return 0.5 * (self.gamma - 1.0)

    @property
    def kappa(self) -> float:
        """Normalized pressure coefficient theta**2 / gamma."""
        return self.theta**2 / self.gamma

    @property
    def lam(self) -> float:
        return (3.0 - self.gamma) / (2.0 * (self.gamma - 1.0))

    @property
    def c_lambda(self) -> float:
        """Inverse of the integral of (1 - z^2)^lambda over [-1, 1]."""
        lam = self.lam
        # 1/B(1/2, lam + 1)
        log_beta = gammaln(0.5) + gammaln(lam + 1.0) - gammaln(lam + 1.5)
        return float(np.exp(-log_beta))

    @property
    def gravity(self) -> float:
        if self.mode != SHALLOW_WATER:
            raise DomainError("gravity is only defined in shallow-water mode")
        return 2.0 * self.pressure_coeff

    @property
    def invariant_scale(self) -> float:
        """Factor s with Riemann invariants u -/+ s * rho**theta.

        Equals 1 in normalized mode; for shallow water s = 2 sqrt(g) so that
        the invariants are u -/+ 2 sqrt(g h).
        """
        if self.mode == NORMALIZED:
            return 1.0
        return float(np.sqrt(self.pressure_coeff * self.gamma) / self.theta)


@dataclass(frozen=True)
class Grid:
    """Cell-centred uniform grid on the unit torus."""

    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 4:
            raise DomainError(f"n_cells must be an integer >= 4, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Midpoint-rule integral over the torus along the last axis."""
        return np.sum(values, axis=-1) * self.dx


@dataclass(frozen=True)
class ConservedField:
    rho: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if rho.shape != q.shape:
            raise DomainError("rho and q must have identical shapes")
        if np.any(rho < 0):
            raise DomainError("negative density")
        if np.any(q[rho == 0] != 0):
            raise DomainError("nonzero momentum in vacuum cells")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_primitive(cls, rho, u) -> "ConservedField":
        rho = np.asarray(rho, dtype=float)
        return cls(rho, np.where(rho > 0, rho * np.asarray(u, dtype=float), 0.0))

    @property
    def u(self) -> np.ndarray:
        return velocity(self.rho, self.q)


class RiemannPair(NamedTuple):
    z: np.ndarray
    w: np.ndarray


def _check_density(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    return rho


def velocity(rho, q):
    """u = q / rho, with u = 0 in vacuum cells."""
    rho = np.asarray(rho, dtype=float)
    q = np.asarray(q, dtype=float)
    occupied = rho > 0
    return np.where(occupied, q / np.where(occupied, rho, 1.0), 0.0)


def pressure(law: GasLaw, rho):
    rho = _check_density(rho)
    return law.pressure_coeff * rho**law.gamma


def flux(law: GasLaw, rho, q):
    """Physical flux (q, q^2/rho + p(rho)); (0, 0) at vacuum."""
    rho = _check_density(rho)
    q = np.asarray(q, dtype=float)
    u = velocity(rho, q)
    return q, q * u + law.pressure_coeff * rho**law.gamma


def sound_speed(law: GasLaw, rho):
    rho = _check_density(rho)
    return np.sqrt(law.pressure_coeff * law.gamma * rho ** (law.gamma - 1.0))


def riemann_invariants(law: GasLaw, rho, q) -> RiemannPair:
    rho = _check_density(rho)
    u = velocity(rho, q)
    r = law.invariant_scale * rho**law.theta
    return RiemannPair(u - r, u + r)


def from_riemann_invariants(law: GasLaw, z, w):
    """Inverse of :func:`riemann_invariants`, returns ``(rho, u)``."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    half = np.maximum(0.5 * (w - z), 0.0) / law.invariant_scale
    return half ** (1.0 / law.theta), 0.5 * (w + z)


def in_invariant_region(pair: RiemannPair, kappa_bound: float):
    """Cellwise test of -kappa <= z <= w <= kappa.

    Returns
    -------
    inside : ndarray of bool
    all_inside : bool
    """
    if kappa_bound < 0:
        raise DomainError("kappa_bound must be non-negative")
    z, w = np.asarray(pair.z), np.asarray(pair.w)
    inside = (-kappa_bound <= z) & (z <= w) & (w <= kappa_bound)
    return inside, bool(np.all(inside))


def shallow_water_scaling(law_sw: GasLaw) -> float:
    """Density factor beta mapping a shallow-water state to normalized form."""
    if law_sw.mode != SHALLOW_WATER:
        raise DomainError("expected a shallow-water law")
    return float((law_sw.pressure_coeff / law_sw.kappa) ** (1.0 / (law_sw.gamma - 1.0)))


def normalize_shallow_water(law_sw: GasLaw, rho, q):
    """Rescale a shallow-water state to the normalized gas law.

    With ``beta = (a / kappa)**(1/(gamma-1))`` the state ``(beta*rho, beta*q)``
    solves the normalized system whenever ``(rho, q)`` solves the shallow-water
    one; the velocity is unchanged.
    """
    beta = shallow_water_scaling(law_sw)
    law_norm = GasLaw.normalized(law_sw.gamma)
    return law_norm, beta * np.asarray(rho, dtype=float), beta * np.asarray(q, dtype=float)


def denormalize_shallow_water(law_sw: GasLaw, rho_n, q_n):
    beta = shallow_water_scaling(law_sw)
    return np.asarray(rho_n, dtype=float) / beta, np.asarray(q_n, dtype=float) / beta
