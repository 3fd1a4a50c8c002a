"""Two photons injected into neighbouring waveguides, followed with the density-matrix engine.

The extended basis holds ordered pairs, single photons and the vacuum, so
loss into the auxiliary waveguides shows up as population leaking to the
lower blocks.  Run: python3 demos/pair_correlations.py
"""

from __future__ import annotations

import numpy as np

from nhwalk import lattice
from nhwalk.floquet import transmission_matrix
from nhwalk.pairs import correlation_matrix, pair_correlation_via_u, pair_trajectory

spec = lattice.reference_lattice()
states = pair_trajectory(spec, 4, 5, 6)
for k, rho in enumerate(states):
    two, one, vac = rho.block_traces()
    print(f"k={k}: P(2)={two:.4f} P(1)={one:.4f} P(0)={vac:.4f}  trace={rho.trace:.12f}")

g = correlation_matrix(states[-1], spec)
print("\nnormalised coincidences at k=6 (unordered, upper triangle):")
print(np.array2string(np.triu(g.unordered()) / g.survival_p2, precision=3, suppress_small=True))

tm = pair_correlation_via_u(transmission_matrix(spec), 4, 5, 6)
print(f"\nlargest gap to the transmission-matrix route: {np.max(np.abs(tm.gamma - g.gamma)):.1e}")
