"""Kinetic entropy-entropy flux pairs and the energy.

For a convex generator ``g`` the pair is

    eta(U) = rho c_lam int g(u + z rho^theta) (1 - z^2)^lam dz
    H(U)   = rho c_lam int g(u + z rho^theta) (u + z theta rho^theta) (1 - z^2)^lam dz

and both integrals are evaluated with a Gauss-Jacobi rule whose weight is
exactly (1 - z^2)^lam, so polynomial generators are integrated exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, NamedTuple, Optional

import numpy as np

from .core import NORMALIZED, DomainError, GasLaw, velocity
from .quadrature import JacobiQuadrature

RHO_FLOOR = 1e-12


class SingularStateError(DomainError):
    """Derivatives of eta in q blow up like 1/rho at vacuum."""


@dataclass(frozen=True)
class EntropyKernel:
    g: Callable[[np.ndarray], np.ndarray]
    g1: Callable[[np.ndarray], np.ndarray]
    g2: Callable[[np.ndarray], np.ndarray]
    subquadratic_constant: Optional[float] = None
    name: str = "g"

    def check(self, xi) -> bool:
        """Sampled convexity / growth audit on the points ``xi``."""
        xi = np.asarray(xi, dtype=float)
        ok = bool(np.all(self.g2(xi) >= 0))
        c = self.subquadratic_constant
        if c is not None:
            ok &= bool(np.all(np.abs(self.g(xi)) <= c * (1 + xi**2)))
            ok &= bool(np.all(np.abs(self.g1(xi)) <= c * (1 + np.abs(xi))))
        return ok


def _const(value):
    return lambda xi: np.full_like(np.asarray(xi, dtype=float), value)


def constant_kernel() -> EntropyKernel:
    return EntropyKernel(_const(1.0), _const(0.0), _const(0.0), 1.0, "one")


def linear_kernel() -> EntropyKernel:
    return EntropyKernel(lambda xi: np.asarray(xi, dtype=float), _const(1.0), _const(0.0), 1.0, "xi")


def energy_kernel() -> EntropyKernel:
    return EntropyKernel(
        lambda xi: 0.5 * np.asarray(xi, dtype=float) ** 2,
        lambda xi: np.asarray(xi, dtype=float),
        _const(1.0),
        1.0,
        "xi^2/2",
    )


def moment_kernel(m: int) -> EntropyKernel:
    """g(xi) = xi^(2m)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        return constant_kernel()
    p = 2 * m
    g2 = (lambda xi: p * (p - 1) * np.asarray(xi, dtype=float) ** (p - 2)) if p > 2 else _const(2.0)
    return EntropyKernel(
        lambda xi: np.asarray(xi, dtype=float) ** p,
        lambda xi: p * np.asarray(xi, dtype=float) ** (p - 1),
        g2,
        2.0 if m == 1 else None,
        f"xi^{p}",
    )


def hyperbolic_kernel() -> EntropyKernel:
    """g(xi) = sqrt(1 + xi^2): convex, subquadratic, not a polynomial."""
    return EntropyKernel(
        lambda xi: np.sqrt(1 + np.asarray(xi, dtype=float) ** 2),
        lambda xi: np.asarray(xi, dtype=float) / np.sqrt(1 + np.asarray(xi, dtype=float) ** 2),
        lambda xi: (1 + np.asarray(xi, dtype=float) ** 2) ** -1.5,
        1.0,
        "sqrt(1+xi^2)",
    )


class EntropyValue(NamedTuple):
    eta: np.ndarray
    h_flux: np.ndarray


def _require_normalized(law: GasLaw):
    if law.mode != NORMALIZED:
        raise DomainError("kinetic entropies need a normalized gas law; rescale shallow-water states first")


def _nodes_and_states(law: GasLaw, quad: JacobiQuadrature, rho, q):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    u = velocity(rho, q)
    s = rho**law.theta
    z = quad.nodes
    xi = u[..., None] + z * s[..., None]
    return rho, u, s, z, xi


def eval_pair(law: GasLaw, kernel: EntropyKernel, quad: JacobiQuadrature, rho, q) -> EntropyValue:
    _require_normalized(law)
    rho, u, s, z, xi = _nodes_and_states(law, quad, rho, q)
    c = law.c_lambda
    gx = kernel.g(xi) * quad.weights
    eta = rho * c * np.sum(gx, axis=-1)
    h = rho * c * np.sum(gx * (u[..., None] + law.theta * z * s[..., None]), axis=-1)
    vac = rho == 0
    return EntropyValue(np.where(vac, 0.0, eta), np.where(vac, 0.0, h))


def energy(law: GasLaw, rho, q):
    """Mechanical energy density rho u^2/2 + a rho^gamma / (gamma - 1).

    In normalized mode ``a = kappa``; in shallow-water mode this is
    ``h u^2/2 + g h^2/2``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    u = velocity(rho, q)
    return 0.5 * rho * u * u + law.pressure_coeff / (law.gamma - 1.0) * rho**law.gamma


def d_lambda(m: int, quad: JacobiQuadrature) -> float:
    """Normalized even moment c_lam int z^(2m) (1 - z^2)^lam dz."""
    if 2 * m > 2 * quad.n_nodes - 1:
        raise ValueError(f"a {quad.n_nodes}-node rule cannot resolve degree {2 * m}")
    z = quad.nodes
    return float(np.sum(quad.weights * z ** (2 * m)) / np.sum(quad.weights))


def eta_moment(law: GasLaw, m: int, quad: JacobiQuadrature, rho, q):
    """eta for g = xi^(2m) from the binomial expansion; odd powers of z drop out."""
    _require_normalized(law)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    u = velocity(rho, q)
    s = rho**law.theta
    total = np.zeros_like(rho)
    for i in range(m + 1):
        # u^(2i) z^(2m-2i) rho^(theta (2m-2i))
        total = total + comb(2 * m, 2 * i) * u ** (2 * i) * s ** (2 * (m - i)) * d_lambda(m - i, quad)
    return rho * total


def chi(law: GasLaw, rho, q, v):
    """Kinetic kernel (v - z)_+^lam (w - v)_+^lam in Riemann-invariant form."""
    _require_normalized(law)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    u = velocity(rho, q)
    s = rho**law.theta
    z, w = u - s, u + s
    v = np.asarray(v, dtype=float)
    a = v - z
    b = w - v
    inside = (a > 0) & (b > 0)
    lam = law.lam
    safe_a = np.where(inside, a, 1.0)
    safe_b = np.where(inside, b, 1.0)
    return np.where(inside, safe_a**lam * safe_b**lam, 0.0)


def eta_derivatives(law: GasLaw, kernel: EntropyKernel, quad: JacobiQuadrature, rho, q, rho_floor: float = RHO_FLOOR):
    """Return ``(d eta / dq, d^2 eta / dq^2)`` per cell."""
    _require_normalized(law)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= rho_floor):
        raise SingularStateError(f"density at or below floor {rho_floor}")
    _, u, s, _, xi = _nodes_and_states(law, quad, rho, q)
    c = law.c_lambda
    d1 = c * np.sum(kernel.g1(xi) * quad.weights, axis=-1)
    d2 = c / rho * np.sum(kernel.g2(xi) * quad.weights, axis=-1)
    return d1, d2
