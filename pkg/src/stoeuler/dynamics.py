"""Deterministic/stochastic time splitting for the viscous stochastic system.

On [t_2k, t_2k+1) the deterministic system d_t U + 2 d_x F(U) = 2 eps d_xx U
is advanced; on [t_2k+1, t_2k+2) the momentum follows dq = sqrt(2) Phi dW
with rho frozen. States are arrays of shape ``(n_cells,)`` or
``(n_realizations, n_cells)``; every row is advanced independently and with
its own CFL-limited substeps, so a row's trajectory never depends on the
other rows in the batch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .core import GasLaw, Grid, riemann_invariants
from .heat import heat_apply
from .noise import IncrementSource, NoiseModel

NEGATIVE_TOLERANCE = 1e-13


class SchemeError(RuntimeError):
    """A step failed; ``rows`` lists the offending batch rows."""

    def __init__(self, message, rows=(), realization_ids=None, step_index=None):
        super().__init__(message)
        self.rows = tuple(int(r) for r in rows)
        self.realization_ids = realization_ids
        self.step_index = step_index


class NegativeDensityError(SchemeError):
    pass


class BlowUpError(SchemeError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    epsilon: float = 1e-3
    tau: float = 1e-3
    cfl: float = 0.5
    rho_floor: float = 0.0
    kappa_bound: Optional[float] = None
    sto_substeps: int = 4
    speed_ceiling: float = 1e4
    max_substeps: int = 1_000_000

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.rho_floor < 0:
            raise ValueError("rho_floor must be non-negative")
        if self.sto_substeps < 1:
            raise ValueError("need at least one stochastic substep")


@dataclass
class StepReport:
    """Per-row bookkeeping for one det or sto step (arrays of length n_rows)."""

    kind: str
    mass_before: np.ndarray
    mass_after: np.ndarray
    momentum_before: np.ndarray
    momentum_after: np.ndarray
    min_rho: np.ndarray
    max_riemann: np.ndarray
    substeps_taken: np.ndarray
    invariant_violation_count: np.ndarray
    gradient_dissipation: np.ndarray
    failed: np.ndarray


def _as_batch(rho, q):
    rho = np.array(rho, dtype=float, copy=True)
    q = np.array(q, dtype=float, copy=True)
    if rho.shape != q.shape:
        raise ValueError("rho and q must have identical shapes")
    single = rho.ndim == 1
    if single:
        rho, q = rho[None, :], q[None, :]
    return rho, q, single


def _unbatch(x, single):
    return x[0] if single else x


def _safe_velocity(rho, q):
    occupied = rho > 0
    return np.where(occupied, q / np.where(occupied, rho, 1.0), 0.0), occupied


def _violations(law, rho, q, kappa_bound):
    if kappa_bound is None:
        return np.zeros(rho.shape[0], dtype=np.int64)
    pair = riemann_invariants(law, rho, q)
    outside = (pair.z < -kappa_bound) | (pair.z > pair.w) | (pair.w > kappa_bound)
    return outside.sum(axis=-1)


def _max_riemann(law, rho, q):
    pair = riemann_invariants(law, rho, q)
    return np.max(np.maximum(np.abs(pair.z), np.abs(pair.w)), axis=-1)


def rusanov_flux(law: GasLaw, rho, q, speedup: float = 2.0):
    """Interface fluxes F_{i+1/2} between cells i and i+1 (periodic)."""
    u, _ = _safe_velocity(rho, q)
    p = law.pressure_coeff * rho**law.gamma
    f0 = q
    f1 = q * u + p
    s = np.abs(u) + np.sqrt(law.pressure_coeff * law.gamma * rho ** (law.gamma - 1.0))
    rho_r, q_r = np.roll(rho, -1, axis=-1), np.roll(q, -1, axis=-1)
    f0_r, f1_r = np.roll(f0, -1, axis=-1), np.roll(f1, -1, axis=-1)
    alpha = np.maximum(s, np.roll(s, -1, axis=-1))
    F0 = 0.5 * speedup * ((f0 + f0_r) - alpha * (rho_r - rho))
    F1 = 0.5 * speedup * ((f1 + f1_r) - alpha * (q_r - q))
    return F0, F1, np.max(s, axis=-1)


def _gradient_dissipation(rho, q, dx):
    """int rho |d_x u|^2 dx with one-sided differences."""
    u, _ = _safe_velocity(rho, q)
    du = (np.roll(u, -1, axis=-1) - u) / dx
    rho_face = 0.5 * (rho + np.roll(rho, -1, axis=-1))
    return np.sum(rho_face * du * du, axis=-1) * dx


def _clip_negative(rho, q, rows_active):
    """Zero out round-off negatives, flag genuine ones."""
    bad_rows = np.any(rho < -NEGATIVE_TOLERANCE, axis=-1)
    small = (rho < 0) & ~bad_rows[:, None]
    if np.any(small):
        rho = np.where(small, 0.0, rho)
        q = np.where(small, 0.0, q)
    return rho, q, bad_rows


def det_step(rho, q, law: GasLaw, cfg: SchemeConfig, dt: float, *, transport: bool = True, on_error: str = "raise"):
    """Advance the sped-up viscous system over ``dt``.

    Each substep applies the conservative Rusanov update with flux 2F and
    then the exact spectral heat step with diffusivity 2*epsilon. Substeps
    are limited per row by ``cfl * dx / (2 max(|u| + c))``.

    Parameters
    ----------
    transport : bool
        Test hook; ``False`` skips the hyperbolic flux.
    on_error : {"raise", "flag"}
        With ``"flag"`` failing rows are frozen and marked in the report.
    """
    rho, q, single = _as_batch(rho, q)
    n_rows, n = rho.shape
    dx = 1.0 / n
    mass0 = rho.sum(axis=-1) * dx
    mom0 = q.sum(axis=-1) * dx
    remaining = np.full(n_rows, float(dt))
    substeps = np.zeros(n_rows, dtype=np.int64)
    dissipation = np.zeros(n_rows)
    failed = np.zeros(n_rows, dtype=bool)
    min_rho = rho.min(axis=-1)
    violations = np.zeros(n_rows, dtype=np.int64)

    def fail(rows, exc_type, message):
        if on_error == "raise":
            raise exc_type(message, rows=np.flatnonzero(rows))
        failed[rows] = True
        remaining[rows] = 0.0

    while True:
        active = np.flatnonzero(remaining > 0)
        if active.size == 0:
            break
        r, m = rho[active], q[active]
        if transport:
            F0, F1, smax = rusanov_flux(law, r, m)
        else:
            smax = np.zeros(active.size)
        too_fast = ~(smax <= cfg.speed_ceiling)
        if np.any(too_fast):
            mask = np.zeros(n_rows, dtype=bool)
            mask[active[too_fast]] = True
            fail(mask, BlowUpError, f"wave speed exceeds ceiling {cfg.speed_ceiling}")
            continue
        with np.errstate(divide="ignore"):
            d = np.where(smax > 0, cfg.cfl * dx / (2.0 * smax), np.inf)
        d = np.minimum(d, remaining[active])
        # absorb a tail shorter than one ulp-scale fraction of the step
        d = np.where(remaining[active] - d <= 1e-14 * dt, remaining[active], d)
        if transport:
            lam = (d / dx)[:, None]
            r = r - lam * (F0 - np.roll(F0, 1, axis=-1))
            m = m - lam * (F1 - np.roll(F1, 1, axis=-1))
        if cfg.epsilon > 0:
            r = heat_apply(r, 2.0 * cfg.epsilon, d)
            m = heat_apply(m, 2.0 * cfg.epsilon, d)
        r, m, bad = _clip_negative(r, m, active)
        if np.any(bad):
            mask = np.zeros(n_rows, dtype=bool)
            mask[active[bad]] = True
            fail(mask, NegativeDensityError, "density fell below -1e-13")
            good = ~bad
            active, r, m, d = active[good], r[good], m[good], d[good]
        rho[active] = r
        q[active] = m
        dissipation[active] += d * _gradient_dissipation(r, m, dx)
        min_rho[active] = np.minimum(min_rho[active], r.min(axis=-1))
        violations[active] = np.maximum(violations[active], _violations(law, r, m, cfg.kappa_bound))
        remaining[active] -= d
        remaining[active] = np.where(remaining[active] <= 1e-14 * dt, 0.0, remaining[active])
        substeps[active] += 1
        if np.any(substeps > cfg.max_substeps):
            mask = substeps > cfg.max_substeps
            fail(mask, BlowUpError, "substep budget exhausted")

    report = StepReport(
        "det",
        mass0,
        rho.sum(axis=-1) * dx,
        mom0,
        q.sum(axis=-1) * dx,
        min_rho,
        _max_riemann(law, rho, q),
        substeps,
        violations,
        dissipation,
        failed,
    )
    return _unbatch(rho, single), _unbatch(q, single), report


def sto_step(rho, q, noise: NoiseModel, cfg: SchemeConfig, increments, dt: float, *, law: Optional[GasLaw] = None):
    """Euler-Maruyama for dq = sqrt(2) sum_k sigma_k(x, rho, u) dbeta_k.

    ``increments`` has shape ``(n_rows, n_substeps, n_modes)`` (or without the
    row axis for a single state); each entry is N(0, dt / n_substeps). The
    density is returned untouched.
    """
    rho, q, single = _as_batch(rho, q)
    n_rows, n = rho.shape
    dx = 1.0 / n
    inc = np.asarray(increments, dtype=float)
    if single and inc.ndim == 2:
        inc = inc[None]
    if inc.ndim != 3 or inc.shape[0] != n_rows or inc.shape[2] != noise.n_modes:
        raise ValueError(f"increments must have shape (rows, substeps, {noise.n_modes})")
    mom0 = q.sum(axis=-1) * dx
    if noise.n_modes > 0:
        x = Grid(n).centers
        prof = noise.profiles(x)
        root2 = math.sqrt(2.0)
        for s in range(inc.shape[1]):
            amp = noise.amplitude(rho, q)
            forcing = np.zeros_like(q)
            for k in range(noise.n_modes):
                forcing = forcing + prof[k] * inc[:, s, k : k + 1]
            q = q + root2 * amp * forcing
    mass = rho.sum(axis=-1) * dx
    monitor = law if law is not None else noise.law
    report = StepReport(
        "sto",
        mass,
        mass,
        mom0,
        q.sum(axis=-1) * dx,
        rho.min(axis=-1),
        _max_riemann(monitor, rho, q) if monitor is not None else np.full(n_rows, np.nan),
        np.full(n_rows, inc.shape[1], dtype=np.int64),
        _violations(monitor, rho, q, cfg.kappa_bound) if monitor is not None else np.zeros(n_rows, dtype=np.int64),
        np.zeros(n_rows),
        np.zeros(n_rows, dtype=bool),
    )
    return _unbatch(rho, single), _unbatch(q, single), report


def split_trajectory(
    rho0,
    q0,
    law: GasLaw,
    noise: NoiseModel,
    cfg: SchemeConfig,
    master_seed: int,
    realization_ids,
    n_periods: int,
    *,
    on_error: str = "raise",
) -> Iterator[tuple]:
    """Yield ``(step_index, t, rho, q, report)`` after every tau-interval.

    Interval 2k is deterministic, interval 2k+1 stochastic. Stochastic
    substep ``s`` of period ``k`` draws the increments with stream index
    ``k * sto_substeps + s``.
    """
    if n_periods < 1:
        raise ValueError("need at least one period")
    rho, q, single = _as_batch(rho0, q0)
    ids = list(realization_ids)
    if len(ids) != rho.shape[0]:
        raise ValueError("one realization id per row is required")
    source = IncrementSource(master_seed, ids, noise.n_modes)
    nsub = cfg.sto_substeps
    dt_sub = cfg.tau / nsub
    failed = np.zeros(rho.shape[0], dtype=bool)
    for period in range(n_periods):
        step = 2 * period
        try:
            rho, q, rep = det_step(rho, q, law, cfg, cfg.tau, on_error=on_error)
        except SchemeError as exc:
            exc.realization_ids = [ids[r] for r in exc.rows]
            exc.step_index = step
            raise
        failed |= rep.failed
        rep.failed = failed.copy()
        yield step + 1, (step + 1) * cfg.tau, _unbatch(rho, single), _unbatch(q, single), rep
        inc = np.stack([source.draw(period * nsub + s, dt_sub) for s in range(nsub)], axis=1)
        inc[failed] = 0.0
        rho, q, rep = sto_step(rho, q, noise, cfg, inc, cfg.tau, law=law)
        rep.failed = failed.copy()
        yield step + 2, (step + 2) * cfg.tau, _unbatch(rho, single), _unbatch(q, single), rep


def split_advance(rho0, q0, law, noise, cfg, master_seed, realization_ids, n_periods):
    """Materialized trajectory: list of ``(t, rho, q, report)`` including t=0."""
    rho0 = np.asarray(rho0, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    out = [(0.0, rho0.copy(), q0.copy(), None)]
    for _, t, rho, q, rep in split_trajectory(rho0, q0, law, noise, cfg, master_seed, realization_ids, n_periods):
        out.append((t, rho.copy(), q.copy(), rep))
    return out
