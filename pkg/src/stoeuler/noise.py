"""Multiplicative noise acting on the momentum equation.

Every model here has the form ``sigma_k(x, rho, u) = rho * a_k(x) * psi(z, w)``
where ``a_k`` is a fixed spatial profile and ``psi`` an optional cutoff that
confines the noise to the invariant region Lambda_kappa. The forcing in the
momentum equation is ``sum_k sigma_k dbeta_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .core import GasLaw, riemann_invariants, velocity

SW_TOPOGRAPHY = "shallow_water_topography"
SW_HEIGHT = "shallow_water_height"
GENERIC = "generic_multiplicative"
ZERO = "zero"

# headroom so that rounding in sin^2 + cos^2 never breaks the declared bound
_A0_HEADROOM = 1.0 + 1e-12


def _no_profiles(x):
    return np.zeros((0,) + np.shape(x))


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    n_modes: int
    profile_fn: Callable[[np.ndarray], np.ndarray]
    A0: float
    law: Optional[GasLaw] = None
    localization_kappa: Optional[float] = None
    localization_margin: float = 0.5
    sigma: tuple = ()

    def profiles(self, x) -> np.ndarray:
        """Spatial factors a_k(x), shape ``(n_modes, len(x))``."""
        return np.asarray(self.profile_fn(np.asarray(x, dtype=float)), dtype=float).reshape(
            (self.n_modes,) + np.shape(x)
        )

    def cutoff(self, rho, q):
        """psi(z, w): 1 on the inner plateau, 0 outside Lambda_kappa."""
        rho = np.asarray(rho, dtype=float)
        if self.localization_kappa is None:
            return np.ones_like(rho)
        pair = riemann_invariants(self.law, rho, q)
        s = np.maximum(np.abs(pair.z), np.abs(pair.w)) / self.localization_kappa
        return smoothstep_cutoff(s, self.localization_margin)

    def amplitude(self, rho, q):
        """The state factor rho * psi shared by all modes."""
        return np.asarray(rho, dtype=float) * self.cutoff(rho, q)

    def coefficients(self, x, rho, q) -> np.ndarray:
        """sigma_k for every mode, shape ``(n_modes,) + broadcast(x, rho).shape``."""
        amp = self.amplitude(rho, q)
        x = np.broadcast_to(np.asarray(x, dtype=float), np.broadcast_shapes(np.shape(x), amp.shape))
        return self.profiles(x) * amp

    def coefficient_fn(self, k: int, x, rho, u):
        rho = np.asarray(rho, dtype=float)
        q = rho * np.asarray(u, dtype=float)
        return self.coefficients(x, rho, q)[k]

    def nominal_injection_rate(self, mass):
        """(1/2) ||sigma||^2 * int rho, the energy input rate quoted for this
        forcing in the shallow-water experiment; meaningful for the two
        shallow-water kinds only."""
        return 0.5 * float(np.sum(np.square(self.sigma))) * np.asarray(mass, dtype=float)


def smoothstep_cutoff(s, margin: float):
    """Quintic smoothstep in ``s``: 1 for s <= 1 - margin, 0 for s >= 1."""
    if not 0.0 < margin < 1.0:
        raise ValueError("margin must lie in (0, 1)")
    t = np.clip((1.0 - np.asarray(s, dtype=float)) / margin, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def zero_noise() -> NoiseModel:
    return NoiseModel(ZERO, 0, _no_profiles, 0.0)


def _mode_amplitudes(sigma: Sequence[float], K: int) -> np.ndarray:
    sig = np.zeros(K)
    vals = np.asarray(list(sigma), dtype=float)[:K]
    sig[: len(vals)] = vals
    if not np.all(np.isfinite(sig)):
        raise ValueError("sigma_k must be finite")
    return sig


def sw_topography_modes(gravity: float, sigma: Sequence[float], K: int) -> NoiseModel:
    """Forcing -g h d_x Z for the random topography

        dZ = sum_k sigma_k [cos(2 pi k x) dbeta_k^flat + sin(2 pi k x) dbeta_k^sharp].

    Modes are ordered (1 flat, 1 sharp, 2 flat, ...); the flat coefficient is
    g h 2 pi k sigma_k sin(2 pi k x), the sharp one -g h 2 pi k sigma_k cos(2 pi k x).
    """
    if K < 1:
        raise ValueError("need at least one mode")
    sig = _mode_amplitudes(sigma, K)
    k = np.arange(1, K + 1)
    amp = gravity * 2.0 * math.pi * k * sig

    def profile_fn(x):
        phase = 2.0 * math.pi * np.multiply.outer(k, x)
        out = np.empty((2 * K,) + np.shape(x))
        out[0::2] = amp.reshape((K,) + (1,) * np.ndim(x)) * np.sin(phase)
        out[1::2] = -amp.reshape((K,) + (1,) * np.ndim(x)) * np.cos(phase)
        return out

    A0 = float(np.sqrt(np.sum(amp**2))) * _A0_HEADROOM
    return NoiseModel(SW_TOPOGRAPHY, 2 * K, profile_fn, A0, GasLaw.shallow_water(gravity), sigma=tuple(float(v) for v in sig))


def sw_height_modes(gravity: float, sigma: Sequence[float], K: int) -> NoiseModel:
    """Forcing h dZ with the same random topography increments.

    Its Ito energy input is exactly (1/2) ||sigma||^2 int h per unit time.
    """
    if K < 1:
        raise ValueError("need at least one mode")
    sig = _mode_amplitudes(sigma, K)
    k = np.arange(1, K + 1)

    def profile_fn(x):
        phase = 2.0 * math.pi * np.multiply.outer(k, x)
        out = np.empty((2 * K,) + np.shape(x))
        out[0::2] = sig.reshape((K,) + (1,) * np.ndim(x)) * np.cos(phase)
        out[1::2] = sig.reshape((K,) + (1,) * np.ndim(x)) * np.sin(phase)
        return out

    A0 = float(np.sqrt(np.sum(sig**2))) * _A0_HEADROOM
    return NoiseModel(SW_HEIGHT, 2 * K, profile_fn, A0, GasLaw.shallow_water(gravity), sigma=tuple(float(v) for v in sig))


def generic_multiplicative(law: GasLaw, profile_fn, n_modes: int, A0: float) -> NoiseModel:
    """sigma_k = rho a_k(x) for user profiles; ``A0`` must bound sqrt(sum a_k^2)."""
    return NoiseModel(GENERIC, n_modes, profile_fn, float(A0), law)


def localize(model: NoiseModel, kappa: float, margin: float = 0.5, law: Optional[GasLaw] = None) -> NoiseModel:
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    smoothstep_cutoff(0.0, margin)
    law = law if law is not None else model.law
    if law is None:
        raise ValueError("localization needs a gas law to form Riemann invariants")
    return replace(model, law=law, localization_kappa=float(kappa), localization_margin=float(margin))


def g_squared(model: NoiseModel, x, rho, q):
    """G^2 = sum_k sigma_k^2, summed in mode order."""
    rho = np.asarray(rho, dtype=float)
    if model.n_modes == 0:
        return np.zeros_like(rho)
    prof = model.profiles(x)
    amp = model.amplitude(rho, q)
    total = np.zeros(np.broadcast_shapes(prof.shape[1:], rho.shape))
    for a in prof:
        total = total + (a * amp) ** 2
    return total


def ito_rate_density(model: NoiseModel, x, rho, q):
    """(1/2) G^2 d^2_qq eta_E = G^2 / (2 rho); zero in vacuum."""
    rho = np.asarray(rho, dtype=float)
    g2 = g_squared(model, x, rho, q)
    occupied = rho > 0
    return np.where(occupied, 0.5 * g2 / np.where(occupied, rho, 1.0), 0.0)


def growth_bound(model: NoiseModel, law: GasLaw, rho, q):
    """Right-hand side A0^2 rho^2 (1 + u^2 + rho^(2 theta))."""
    rho = np.asarray(rho, dtype=float)
    u = velocity(rho, q)
    return model.A0**2 * rho**2 * (1.0 + u * u + rho ** (2.0 * law.theta))


# --------------------------------------------------------------------------
# Brownian increments from counter-based streams

BLOCK_STEPS = 256


class WienerIncrement(NamedTuple):
    dW: np.ndarray
    dt: float
    realization_id: int
    step_index: int


def stream_key(master_seed: int, realization_id: int) -> int:
    words = np.random.SeedSequence([int(master_seed), int(realization_id)]).generate_state(2, np.uint64)
    return int(words[0]) | (int(words[1]) << 64)


def standard_block(master_seed: int, realization_id: int, block_index: int, K: int) -> np.ndarray:
    """Standard normals for steps ``block_index * BLOCK_STEPS ...``, shape (BLOCK_STEPS, K).

    A pure function of its arguments: the Philox key is derived from
    (master_seed, realization_id) and the block index sits in the second
    counter word, so blocks never share counter values.
    """
    if K == 0:
        return np.zeros((BLOCK_STEPS, 0))
    bitgen = np.random.Philox(key=stream_key(master_seed, realization_id), counter=int(block_index) << 64)
    return np.random.Generator(bitgen).standard_normal((BLOCK_STEPS, K))


def sample_increments(master_seed: int, realization_id: int, step_index: int, K: int, dt: float) -> WienerIncrement:
    if not dt > 0:
        raise ValueError("dt must be positive")
    block = standard_block(master_seed, realization_id, step_index // BLOCK_STEPS, K)
    dW = math.sqrt(dt) * block[step_index % BLOCK_STEPS]
    return WienerIncrement(dW, dt, int(realization_id), int(step_index))


class IncrementSource:
    """Caches one block per realization so consecutive steps stay cheap.

    ``draw(step_index, dt)`` returns exactly what :func:`sample_increments`
    would for each realization id.
    """

    def __init__(self, master_seed: int, realization_ids, K: int):
        self.master_seed = int(master_seed)
        self.realization_ids = [int(r) for r in realization_ids]
        self.K = int(K)
        self._block_index = None
        self._blocks = None

    def draw(self, step_index: int, dt: float) -> np.ndarray:
        b = step_index // BLOCK_STEPS
        if b != self._block_index:
            self._blocks = np.stack(
                [standard_block(self.master_seed, r, b, self.K) for r in self.realization_ids]
            )
            self._block_index = b
        return math.sqrt(dt) * self._blocks[:, step_index % BLOCK_STEPS, :]
