"""Gauss-Jacobi rules for the symmetric weight (1 - z^2)^lambda on [-1, 1]."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

DEFAULT_NODES = 48


def _weight_mass(lam: float) -> float:
    # int_{-1}^{1} (1 - z^2)^lam dz = 2^(2 lam + 1) Gamma(lam + 1)^2 / Gamma(2 lam + 2)
    return float(np.exp((2 * lam + 1) * np.log(2.0) + 2 * gammaln(lam + 1) - gammaln(2 * lam + 2)))


def golub_welsch(n: int, lam: float):
    """Nodes and weights of the n-point Gauss rule for (1 - z^2)^lam.

    The symmetric Jacobi matrix has zero diagonal; its off-diagonal entries
    are square roots of the monic recurrence coefficients with
    alpha = beta = lam.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if not lam > -1.0:
        raise ValueError("weight exponent must exceed -1")
    k = np.arange(1, n, dtype=float)
    s = 2.0 * k + 2.0 * lam
    # b_k = 4 k (k + lam)^2 (k + 2 lam) / (s^2 (s + 1)(s - 1))
    b = 4.0 * k * (k + lam) ** 2 * (k + 2.0 * lam) / (s * s * (s + 1.0) * (s - 1.0))
    off = np.sqrt(b)
    nodes, vecs = np.linalg.eigh(np.diag(off, -1) + np.diag(off, 1))
    weights = _weight_mass(lam) * vecs[0, :] ** 2
    # enforce exact symmetry of the rule
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


@lru_cache(maxsize=64)
def _cached_rule(n: int, lam: float):
    nodes, weights = golub_welsch(n, lam)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class JacobiQuadrature:
    """Immutable Gauss-Jacobi table; ``weights.sum() == 1 / c_lambda``."""

    lam: float
    n_nodes: int = DEFAULT_NODES

    @property
    def nodes(self) -> np.ndarray:
        return _cached_rule(self.n_nodes, float(self.lam))[0]

    @property
    def weights(self) -> np.ndarray:
        return _cached_rule(self.n_nodes, float(self.lam))[1]

    @property
    def mass(self) -> float:
        return _weight_mass(self.lam)

    @classmethod
    def for_law(cls, law, n_nodes: int = DEFAULT_NODES) -> "JacobiQuadrature":
        return cls(law.lam, n_nodes)

    def integrate(self, f):
        """Approximate int f(z) (1 - z^2)^lam dz; f is vectorized over z."""
        return np.sum(self.weights * f(self.nodes), axis=-1)
