"""
Time-averaged energy of the four presets
========================================

Plot the ``time_avg_energy`` column of ``stats.csv`` for runs of the four
presets. Produce the inputs first, for example::

    for p in test1 test2 test3 test4; do
        python -m stoeuler --preset $p --out runs/$p
    done
    python demos/plot_time_averaged_energy.py runs

Tests 1 and 2 share the same mass and momentum, as do Tests 3 and 4, and their
curves should settle onto common levels.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

root = Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
fig, ax = plt.subplots(figsize=(7, 4))
for preset in ("test1", "test2", "test3", "test4"):
    path = root / preset / "stats.csv"
    if not path.exists():
        print("missing", path)
        continue
    data = np.genfromtxt(path, delimiter=",", names=True, encoding="utf-8")
    ax.plot(data["t"], data["time_avg_energy"], label=preset)

ax.set_xlabel("t")
ax.set_ylabel("time-averaged mean energy")
ax.legend()
fig.tight_layout()
out = root / "time_averaged_energy.png"
fig.savefig(out, dpi=120)
print("wrote", out)
