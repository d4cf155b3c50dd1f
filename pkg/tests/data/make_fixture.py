"""Regenerates the bundled pipeline fixture.

Two ring communities of eight vertices joined by one bridge edge, carrying
a TTI-like series with three congestion waves (one per community, one
shared) on top of a mean-reverting noise floor, plus a few missing cells
to exercise imputation. Everything is seeded; rerunning this script must
reproduce the committed files byte for byte.
"""

import os

import numpy as np

from psgraph import build_graph
from psgraph.io import write_graph_csv, write_series_csv

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "fixture")

CONFIG = """\
# bundled pipeline fixture settings
alpha = 1.7
min_ac_size = 2
gamma_th = 0.6
theta = 2
max_lag = 0
model = jcm-ar
ar_order = 3
regimes = 2
tar_grid = 10
train_frac = 0.7
val_frac = 0.1
test_frac = 0.2
horizons = 5,7,10
seasonal_period = 0
difference = true
shift = directed-laplacian
directed = false
impute_width = 5
seed = 11
"""


def ring_with_chords(base):
    edges = [(base + k, base + (k + 1) % 8, 1.0) for k in range(8)]
    edges += [(base + k, base + (k + 2) % 8, 1.0) for k in range(0, 8, 2)]
    return edges


def main():
    rng = np.random.default_rng(11)
    edges = ring_with_chords(0) + ring_with_chords(8) + [(3, 11, 1.0)]
    labels = tuple(f"v{i:02d}" for i in range(16))
    g = build_graph(16, edges, directed=False, labels=labels)

    n, t_total = 16, 400
    x = np.empty((n, t_total))
    level = rng.normal(1.05, 0.02, size=n)
    state = np.zeros(n)
    waves = [(range(0, 8), 20, 60, 1.15),
             (range(8, 16), 120, 170, 1.25),
             (range(0, 16), 250, 300, 1.05)]
    for t in range(t_total):
        state = 0.82 * state + 0.035 * rng.normal(size=n)
        x[:, t] = level + state
        for vs, a, b, amp in waves:
            if a <= t < b:
                bump = amp * (1.0 + 0.08 * np.sin(2 * np.pi * (t - a) / (b - a)))
                for v in vs:
                    x[v, t] += bump
    for v, t in [(2, 33), (5, 200), (9, 150), (14, 380), (7, 0), (11, 399)]:
        x[v, t] = np.nan

    os.makedirs(OUT, exist_ok=True)
    write_graph_csv(os.path.join(OUT, "graph.csv"), g)
    write_series_csv(os.path.join(OUT, "series.csv"), x, labels)
    with open(os.path.join(OUT, "config.txt"), "w", newline="\n") as fh:
        fh.write(CONFIG)
    print(f"fixture written to {OUT}")


if __name__ == "__main__":
    main()
