"""
Young-measure histograms from snapshots
=======================================

Record field snapshots, bin the states of a space-time window in Riemann
invariant coordinates and evaluate two diagnostics: how concentrated the
empirical measure is on a single bin or on vacuum, and the commutation
residual between two entropy pairs.
"""

import numpy as np

from stoeuler.config import RunConfig
from stoeuler.ensemble import dirac_or_vacuum_score, functional_equation_residual, run_ensemble, young_histogram
from stoeuler.entropy import energy_kernel, linear_kernel

cfg = RunConfig(preset="test1", realizations=16, horizon=1.0, cells=128, output_stride=100,
                emit_snapshots=True).resolve()
stats = run_ensemble(cfg.ensemble_config())
store = stats.snapshots
print("snapshots:", len(store), "records at steps", store.steps)

for window in [((0.0, 1.0), (0.0, 0.0)), ((0.2, 0.3), (0.8, 1.0)), ((0.0, 1.0), (0.5, 1.0))]:
    h = young_histogram(store, cfg.law(), window, bins=24)
    print()
    print("window x in %s, t in %s: %d samples" % (window[0], window[1], h.n_samples))
    print("  occupied bins:", np.count_nonzero(h.counts), " vacuum mass:", h.vacuum_mass)
    print("  dirac-or-vacuum score: %.3f" % dirac_or_vacuum_score(h))
    # zero for a point mass, generally not for a spread-out histogram
    print("  commutation residual (energy, momentum): %.3e"
          % functional_equation_residual(h, energy_kernel(), linear_kernel()))
