"""Monte Carlo driver, ensemble statistics and Young-measure diagnostics.

Realizations are advanced in batches; everything a realization produces is
stored under its id and the ensemble moments are formed only afterwards with
a fixed pairwise summation tree. Batching, chunk size and thread count
therefore never change a single bit of the statistics.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .core import NORMALIZED, GasLaw, Grid, from_riemann_invariants, normalize_shallow_water, riemann_invariants
from .dynamics import SchemeConfig, SchemeError, split_trajectory
from .entropy import EntropyKernel, energy, eval_pair
from .noise import NoiseModel, ito_rate_density
from .quadrature import JacobiQuadrature

MIN_REALIZATIONS_FOR_CI = 64
VACUUM_FRACTION = 1e-6
L8_ORDER = 8


@dataclass(frozen=True)
class EnsembleConfig:
    """Everything needed to reproduce an ensemble.

    ``output_stride`` counts tau-intervals between recorded times; the
    horizon must consist of whole splitting periods 2 tau.
    """

    law: GasLaw
    noise: NoiseModel
    scheme: SchemeConfig
    rho0: np.ndarray
    q0: np.ndarray
    n_realizations: int = 16
    master_seed: int = 0
    horizon: float = 1.0
    output_stride: int = 10
    first_realization: int = 0
    batch_size: int = 64
    workers: int = 1
    record_snapshots: bool = False

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")
        if self.output_stride < 1:
            raise ValueError("output_stride must be positive")
        if self.batch_size < 1 or self.workers < 1:
            raise ValueError("batch_size and workers must be positive")
        rho0 = np.asarray(self.rho0, dtype=float)
        if rho0.ndim != 1 or rho0.shape != np.shape(self.q0):
            raise ValueError("initial data must be two 1-d arrays of equal length")
        Grid(rho0.size)
        self.n_periods  # validates horizon

    @property
    def n_periods(self) -> int:
        periods = self.horizon / (2.0 * self.scheme.tau)
        k = round(periods)
        if k < 1 or abs(periods - k) > 1e-9 * max(1.0, periods):
            raise ValueError("horizon must be a positive whole number of periods 2*tau")
        return int(k)

    @property
    def n_steps(self) -> int:
        return 2 * self.n_periods

    @property
    def realization_ids(self) -> List[int]:
        return list(range(self.first_realization, self.first_realization + self.n_realizations))

    @property
    def recorded_steps(self) -> np.ndarray:
        steps = list(range(0, self.n_steps + 1, self.output_stride))
        if steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return np.asarray(steps)

    def fingerprint(self) -> str:
        """Hash of every numeric input; identifies the run in manifests."""
        h = hashlib.sha256()
        meta = {
            "law": [self.law.gamma, self.law.pressure_coeff, self.law.mode],
            "noise": [self.noise.kind, self.noise.n_modes, self.noise.A0, self.noise.localization_kappa,
                      self.noise.localization_margin, list(self.noise.sigma)],
            "scheme": [self.scheme.epsilon, self.scheme.tau, self.scheme.cfl, self.scheme.rho_floor,
                       self.scheme.kappa_bound, self.scheme.sto_substeps, self.scheme.speed_ceiling],
            "run": [self.n_realizations, self.master_seed, self.horizon, self.output_stride, self.first_realization],
        }
        h.update(json.dumps(meta, sort_keys=True).encode())
        h.update(np.ascontiguousarray(self.rho0, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.q0, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


# --------------------------------------------------------------------------
# snapshot store

_RECORD_HEADER = np.dtype([("rid", "<u4"), ("step", "<u4")])


class SnapshotStore:
    """Snapshots keyed by (realization id, step index).

    On disk: ``snapshots.bin`` holds records ``u32 rid, u32 step, rho[n],
    q[n]`` (little endian, float64) sorted by (rid, step), and
    ``manifest.txt`` lists grid size, tau, recorded times and a config hash.
    """

    def __init__(self, n_cells: int, tau: float, rho_mean0: float = 1.0, config_hash: str = ""):
        self.n_cells = int(n_cells)
        self.tau = float(tau)
        self.rho_mean0 = float(rho_mean0)
        self.config_hash = config_hash
        self._data: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]] = {}

    def add(self, rid: int, step: int, rho, q) -> None:
        rho = np.array(rho, dtype=float)
        q = np.array(q, dtype=float)
        if rho.shape != (self.n_cells,) or q.shape != (self.n_cells,):
            raise ValueError("snapshot has the wrong length")
        self._data[(int(rid), int(step))] = (rho, q)

    def __len__(self):
        return len(self._data)

    def keys(self):
        return sorted(self._data)

    @property
    def steps(self) -> List[int]:
        return sorted({s for _, s in self._data})

    @property
    def realization_ids(self) -> List[int]:
        return sorted({r for r, _ in self._data})

    def get(self, rid: int, step: int):
        return self._data[(int(rid), int(step))]

    def fields_at(self, step: int):
        """Stacked ``(rho, q)`` over realizations at one step, ordered by id."""
        keys = [k for k in self.keys() if k[1] == step]
        if not keys:
            raise KeyError(f"no snapshots at step {step}")
        return (np.stack([self._data[k][0] for k in keys]), np.stack([self._data[k][1] for k in keys]))

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        rec = np.dtype(_RECORD_HEADER.descr + [("rho", "<f8", (self.n_cells,)), ("q", "<f8", (self.n_cells,))])
        keys = self.keys()
        arr = np.zeros(len(keys), dtype=rec)
        for i, (r, s) in enumerate(keys):
            arr[i] = (r, s, *self._data[(r, s)])
        (directory / "snapshots.bin").write_bytes(arr.tobytes())
        times = " ".join(repr(s * self.tau) for s in self.steps)
        lines = [
            "format u32 rid, u32 step, f64[n_cells] rho, f64[n_cells] q (little endian)",
            f"n_cells {self.n_cells}",
            f"tau {self.tau!r}",
            f"rho_mean0 {self.rho_mean0!r}",
            f"records {len(keys)}",
            f"config_hash {self.config_hash}",
            f"steps {' '.join(str(s) for s in self.steps)}",
            f"times {times}",
        ]
        (directory / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        return directory

    @classmethod
    def load(cls, directory) -> "SnapshotStore":
        directory = Path(directory)
        meta = {}
        for line in (directory / "manifest.txt").read_text(encoding="utf-8").splitlines():
            key, _, value = line.partition(" ")
            meta[key] = value
        n = int(meta["n_cells"])
        store = cls(n, float(meta["tau"]), float(meta["rho_mean0"]), meta.get("config_hash", ""))
        rec = np.dtype(_RECORD_HEADER.descr + [("rho", "<f8", (n,)), ("q", "<f8", (n,))])
        arr = np.frombuffer((directory / "snapshots.bin").read_bytes(), dtype=rec)
        if arr.size != int(meta["records"]):
            raise ValueError("snapshot file is truncated")
        for row in arr:
            store.add(int(row["rid"]), int(row["step"]), row["rho"], row["q"])
        return store


# --------------------------------------------------------------------------
# running the ensemble


@dataclass
class RealizationSeries:
    """Everything recorded for one realization, at ``EnsembleConfig.recorded_steps``."""

    energy: np.ndarray
    energy_integral: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    min_rho: np.ndarray
    violations: np.ndarray
    ito_rate: np.ndarray
    max_jump: np.ndarray
    gradient_dissipation: np.ndarray
    velocity_l8: np.ndarray
    det_momentum_drift: float = 0.0
    failure: Optional[str] = None


def pairwise_sum(values: np.ndarray) -> np.ndarray:
    """Sum along axis 0 with a fixed balanced binary tree."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n == 0:
        return np.zeros(values.shape[1:])
    if n == 1:
        return values[0].copy()
    mid = (n + 1) // 2
    return pairwise_sum(values[:mid]) + pairwise_sum(values[mid:])


def _mean_and_stderr(values: np.ndarray):
    n = values.shape[0]
    mean = pairwise_sum(values) / n
    if n < 2:
        return mean, np.full_like(mean, np.nan)
    dev = values - mean
    var = pairwise_sum(dev * dev) / (n - 1)
    return mean, np.sqrt(var / n)


def _integrals(law, noise, x, dx, rho, q):
    e = energy(law, rho, q).sum(axis=-1) * dx
    ito = ito_rate_density(noise, x, rho, q).sum(axis=-1) * dx
    pair = riemann_invariants(law, rho, q)
    jump = np.maximum(
        np.max(np.abs(np.roll(pair.z, -1, axis=-1) - pair.z), axis=-1),
        np.max(np.abs(np.roll(pair.w, -1, axis=-1) - pair.w), axis=-1),
    )
    occupied = rho > 0
    u = np.where(occupied, q / np.where(occupied, rho, 1.0), 0.0)
    l8 = (np.sum(u**L8_ORDER, axis=-1) * dx) ** (1.0 / L8_ORDER)
    return e, ito, jump, l8


def _run_batch(cfg: EnsembleConfig, ids: Sequence[int], store: Optional[SnapshotStore]):
    law, noise, scheme = cfg.law, cfg.noise, cfg.scheme
    n = cfg.rho0.size
    x = Grid(n).centers
    dx = 1.0 / n
    R = len(ids)
    rec_steps = cfg.recorded_steps
    n_rec = rec_steps.size
    rho = np.broadcast_to(np.asarray(cfg.rho0, dtype=float), (R, n)).copy()
    q = np.broadcast_to(np.asarray(cfg.q0, dtype=float), (R, n)).copy()

    out = {k: np.zeros((R, n_rec)) for k in
           ("energy", "energy_integral", "mass", "momentum", "min_rho", "ito_rate", "max_jump",
            "gradient_dissipation", "velocity_l8")}
    out["violations"] = np.zeros((R, n_rec), dtype=np.int64)
    det_drift = np.zeros(R)
    failures: Dict[int, str] = {}

    e, ito, jump, l8 = _integrals(law, noise, x, dx, rho, q)
    out["energy"][:, 0] = e
    out["mass"][:, 0] = rho.sum(axis=-1) * dx
    out["momentum"][:, 0] = q.sum(axis=-1) * dx
    out["min_rho"][:, 0] = rho.min(axis=-1)
    out["ito_rate"][:, 0] = ito
    out["max_jump"][:, 0] = jump
    out["velocity_l8"][:, 0] = l8
    if store is not None:
        for i, rid in enumerate(ids):
            store.add(rid, 0, rho[i], q[i])

    e_prev = e
    e_int = np.zeros(R)
    run_min = rho.min(axis=-1)
    run_viol = np.zeros(R, dtype=np.int64)
    run_diss = np.zeros(R)
    run_l8 = l8.copy()
    failed = np.zeros(R, dtype=bool)
    col = 1
    traj = split_trajectory(rho, q, law, noise, scheme, cfg.master_seed, ids, cfg.n_periods, on_error="flag")
    for step, t, rho, q, rep in traj:
        newly = rep.failed & ~failed
        for i in np.flatnonzero(newly):
            failures[ids[i]] = f"step {step}: scheme failure"
        failed |= rep.failed
        e, ito, jump, l8 = _integrals(law, noise, x, dx, rho, q)
        e_int = e_int + 0.5 * scheme.tau * (e_prev + e)
        e_prev = e
        run_min = np.minimum(run_min, rep.min_rho)
        run_viol = run_viol + rep.invariant_violation_count
        run_diss = run_diss + rep.gradient_dissipation
        run_l8 = np.maximum(run_l8, l8)
        if rep.kind == "det":
            scale = np.maximum(np.abs(rep.momentum_before), np.abs(rep.mass_before))
            det_drift = np.maximum(det_drift, np.abs(rep.momentum_after - rep.momentum_before) / scale)
        if col < n_rec and step == rec_steps[col]:
            out["energy"][:, col] = e
            out["energy_integral"][:, col] = e_int
            out["mass"][:, col] = rep.mass_after
            out["momentum"][:, col] = rep.momentum_after
            out["min_rho"][:, col] = run_min
            out["violations"][:, col] = run_viol
            out["ito_rate"][:, col] = ito
            out["max_jump"][:, col] = jump
            out["gradient_dissipation"][:, col] = run_diss
            out["velocity_l8"][:, col] = run_l8
            run_min = rho.min(axis=-1)
            if store is not None:
                for i, rid in enumerate(ids):
                    if not failed[i]:
                        store.add(rid, step, rho[i], q[i])
            col += 1

    series = {}
    for i, rid in enumerate(ids):
        series[rid] = RealizationSeries(
            **{k: v[i].copy() for k, v in out.items()},
            det_momentum_drift=float(det_drift[i]),
            failure=failures.get(rid),
        )
    return series


@dataclass
class EnsembleStats:
    """Ensemble moments at the recorded times plus the per-realization series."""

    t: np.ndarray
    mean_energy: np.ndarray
    energy_stderr: np.ndarray
    time_avg_energy: np.ndarray
    time_avg_stderr: np.ndarray
    mean_mass: np.ndarray
    mean_momentum: np.ndarray
    momentum_stderr: np.ndarray
    min_rho: np.ndarray
    invariant_violations: np.ndarray
    ito_injection_rate: np.ndarray
    ito_stderr: np.ndarray
    nominal_injection_rate: np.ndarray
    n_realizations: int
    realization_ids: List[int]
    series: Dict[int, RealizationSeries] = field(repr=False)
    failures: Dict[int, str] = field(default_factory=dict)
    snapshots: Optional[SnapshotStore] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return not self.failures

    def per_realization(self, name: str) -> np.ndarray:
        """Stack one recorded quantity over the surviving realizations."""
        return np.stack([getattr(self.series[r], name) for r in self.realization_ids])

    def smooth_window_end(self, jump_threshold: float, cap: float = 0.2) -> float:
        """Last recorded time before the median Riemann-invariant jump first
        exceeds ``jump_threshold``, capped at ``cap``."""
        med = np.median(self.per_realization("max_jump"), axis=0)
        above = np.flatnonzero(med > jump_threshold)
        end = self.t[above[0] - 1] if above.size and above[0] > 0 else (self.t[0] if above.size else self.t[-1])
        return float(min(end, cap))


def _aggregate(cfg: EnsembleConfig, series: Dict[int, RealizationSeries], store) -> EnsembleStats:
    failures = {r: s.failure for r, s in series.items() if s.failure}
    good = [r for r in sorted(series) if not series[r].failure]
    t = cfg.recorded_steps * cfg.scheme.tau
    if not good:
        nan = np.full(t.shape, np.nan)
        return EnsembleStats(t, nan, nan, nan, nan, nan, nan, nan, nan, np.zeros(t.shape, dtype=np.int64),
                             nan, nan, nan, 0, [], series, failures, store)

    def stack(name):
        return np.stack([getattr(series[r], name) for r in good])

    energy_all = stack("energy")
    with np.errstate(invalid="ignore", divide="ignore"):
        tavg = np.where(t > 0, stack("energy_integral") / np.where(t > 0, t, 1.0), energy_all)
    mean_e, se_e = _mean_and_stderr(energy_all)
    mean_ta, se_ta = _mean_and_stderr(tavg)
    mass, _ = _mean_and_stderr(stack("mass"))
    mom, se_mom = _mean_and_stderr(stack("momentum"))
    ito, se_ito = _mean_and_stderr(stack("ito_rate"))
    viol = stack("violations").sum(axis=0)
    return EnsembleStats(
        t=t,
        mean_energy=mean_e,
        energy_stderr=se_e,
        time_avg_energy=mean_ta,
        time_avg_stderr=se_ta,
        mean_mass=mass,
        mean_momentum=mom,
        momentum_stderr=se_mom,
        min_rho=stack("min_rho").min(axis=0),
        invariant_violations=viol,
        ito_injection_rate=ito,
        ito_stderr=se_ito,
        nominal_injection_rate=cfg.noise.nominal_injection_rate(mass),
        n_realizations=len(good),
        realization_ids=good,
        series=series,
        failures=failures,
        snapshots=store,
    )


def run_ensemble(cfg: EnsembleConfig) -> EnsembleStats:
    """Run all realizations and reduce them in realization-id order.

    Failed realizations are listed in ``stats.failures`` and excluded from
    the moments; callers treat a non-empty list as a hard failure.
    """
    ids = cfg.realization_ids
    chunks = [ids[i : i + cfg.batch_size] for i in range(0, len(ids), cfg.batch_size)]
    stores = [
        SnapshotStore(cfg.rho0.size, cfg.scheme.tau, float(np.mean(cfg.rho0)), cfg.fingerprint())
        if cfg.record_snapshots else None
        for _ in chunks
    ]
    if cfg.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda a: _run_batch(cfg, *a), zip(chunks, stores)))
    else:
        results = [_run_batch(cfg, c, s) for c, s in zip(chunks, stores)]
    series: Dict[int, RealizationSeries] = {}
    for part in results:
        series.update(part)
    store = None
    if cfg.record_snapshots:
        store = stores[0]
        for extra in stores[1:]:
            store._data.update(extra._data)
    return _aggregate(cfg, series, store)


# --------------------------------------------------------------------------
# diagnostics


class EnergyBalance(NamedTuple):
    residual: float
    stderr: float
    slope: float
    injection: float


def energy_balance_residual(stats: EnsembleStats, window: Tuple[float, float]) -> EnergyBalance:
    """r = d/dt E int eta_E - (1/2) E int G^2 d_qq eta_E over ``window``.

    Each realization contributes its least-squares energy slope minus its
    mean Ito rate over the window; the residual is the ensemble mean of these
    and ``stderr`` its standard error.
    """
    t0, t1 = window
    if not (stats.t[0] - 1e-12 <= t0 < t1 <= stats.t[-1] + 1e-12):
        raise ValueError("window must lie inside the recorded horizon")
    sel = (stats.t >= t0 - 1e-12) & (stats.t <= t1 + 1e-12)
    if sel.sum() < 2:
        raise ValueError("window holds fewer than two recorded times")
    t = stats.t[sel]
    tc = t - t.mean()
    e = stats.per_realization("energy")[:, sel]
    ito = stats.per_realization("ito_rate")[:, sel]
    slopes = (e - e.mean(axis=1, keepdims=True)) @ tc / np.dot(tc, tc)
    # trapezoid mean of the injection rate over the window
    inj = trapezoid(ito, t, axis=1) / (t[-1] - t[0])
    r = slopes - inj
    mean, se = _mean_and_stderr(r[:, None])
    ms, _ = _mean_and_stderr(slopes[:, None])
    mi, _ = _mean_and_stderr(inj[:, None])
    return EnergyBalance(float(mean[0]), float(se[0]), float(ms[0]), float(mi[0]))


@dataclass
class MomentumReport:
    status: str
    t: np.ndarray
    drift: np.ndarray
    tolerance: np.ndarray
    passed: np.ndarray

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def momentum_conservation_test(stats: EnsembleStats, min_realizations: int = MIN_REALIZATIONS_FOR_CI) -> MomentumReport:
    """Compare E int q at every recorded time with its initial value (3 SE)."""
    drift = np.abs(stats.mean_momentum - stats.mean_momentum[0])
    if stats.n_realizations < min_realizations:
        empty = np.zeros(0)
        return MomentumReport("insufficient N", stats.t, drift, empty, np.zeros(0, dtype=bool))
    scale = max(float(np.max(np.abs(stats.mean_momentum))), float(np.max(np.abs(stats.mean_mass))))
    tol = 3.0 * stats.momentum_stderr + 1e-12 * scale
    passed = drift <= tol
    return MomentumReport("pass" if passed.all() else "fail", stats.t, drift, tol, passed)


@dataclass
class YoungHistogram:
    """Empirical (w, z) distribution of the non-vacuum samples in a window."""

    w_edges: np.ndarray
    z_edges: np.ndarray
    counts: np.ndarray
    vacuum_count: int
    n_samples: int
    law: GasLaw
    window: tuple = ()

    @property
    def vacuum_mass(self) -> float:
        return self.vacuum_count / self.n_samples if self.n_samples else 0.0

    @property
    def w_centers(self):
        return 0.5 * (self.w_edges[1:] + self.w_edges[:-1])

    @property
    def z_centers(self):
        return 0.5 * (self.z_edges[1:] + self.z_edges[:-1])


def _edges(values, bins, span):
    if span is not None:
        lo, hi = span
    elif values.size:
        lo, hi = float(values.min()), float(values.max())
    else:
        lo, hi = -1.0, 1.0
    if hi - lo <= 1e-12 * max(1.0, abs(lo), abs(hi)):
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, bins + 1)


def histogram_from_samples(law: GasLaw, rho, q, bins=32, vacuum_threshold: float = 0.0,
                           w_range=None, z_range=None, window=()) -> YoungHistogram:
    """Histogram states ``(rho, q)`` (any shape) over the (w, z) plane."""
    rho = np.asarray(rho, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    bw, bz = (bins, bins) if np.isscalar(bins) else bins
    vac = rho < vacuum_threshold if vacuum_threshold > 0 else rho <= 0
    pair = riemann_invariants(law, rho[~vac], q[~vac])
    w_edges = _edges(pair.w, bw, w_range)
    z_edges = _edges(pair.z, bz, z_range)
    counts, _, _ = np.histogram2d(pair.w, pair.z, bins=[w_edges, z_edges])
    return YoungHistogram(w_edges, z_edges, counts.astype(np.int64), int(vac.sum()), int(rho.size), law, window)


def young_histogram(store: SnapshotStore, law: GasLaw, window, bins=32, w_range=None, z_range=None) -> YoungHistogram:
    """Histogram every (realization, cell) sample inside ``window``.

    ``window = ((x_lo, x_hi), (t_lo, t_hi))``; cells are selected by their
    centers, times by the recorded snapshot steps. Samples with density
    below 1e-6 times the initial mean density count as vacuum.
    """
    (x_lo, x_hi), (t_lo, t_hi) = window
    x = Grid(store.n_cells).centers
    xsel = (x >= x_lo) & (x <= x_hi)
    steps = [s for s in store.steps if t_lo - 1e-12 <= s * store.tau <= t_hi + 1e-12]
    if not steps or not xsel.any():
        raise ValueError("window contains no recorded samples")
    rho = np.concatenate([store.fields_at(s)[0][:, xsel].ravel() for s in steps])
    q = np.concatenate([store.fields_at(s)[1][:, xsel].ravel() for s in steps])
    return histogram_from_samples(law, rho, q, bins, VACUUM_FRACTION * store.rho_mean0, w_range, z_range, window)


def dirac_or_vacuum_score(h: YoungHistogram) -> float:
    """Heaviest non-vacuum bin mass plus vacuum mass."""
    if h.n_samples == 0:
        raise ValueError("empty histogram")
    top = int(h.counts.max()) if h.counts.size else 0
    return (top + h.vacuum_count) / h.n_samples


def _atoms(h: YoungHistogram):
    iw, iz = np.nonzero(h.counts)
    weights = h.counts[iw, iz] / h.n_samples
    rho, u = from_riemann_invariants(h.law, h.z_centers[iz], h.w_centers[iw])
    return rho, rho * u, weights


def functional_equation_residual(h: YoungHistogram, pair1: EntropyKernel, pair2: EntropyKernel,
                                 quad: Optional[JacobiQuadrature] = None) -> float:
    """<eta2><H1> - <eta1><H2> - <eta2 H1 - eta1 H2> over the empirical measure.

    Each occupied bin is an atom at its centre; vacuum samples are atoms on
    which every entropy vanishes. Shallow-water states are rescaled to the
    normalized law first.
    """
    rho, q, wts = _atoms(h)
    law = h.law
    if law.mode != NORMALIZED:
        law, rho, q = normalize_shallow_water(law, rho, q)
    quad = quad or JacobiQuadrature.for_law(law)
    e1, f1 = eval_pair(law, pair1, quad, rho, q)
    e2, f2 = eval_pair(law, pair2, quad, rho, q)
    avg = lambda v: float(np.sum(wts * v))
    return avg(e2) * avg(f1) - avg(e1) * avg(f2) - avg(e2 * f1 - e1 * f2)
