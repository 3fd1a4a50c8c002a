"""Single photon in a nine-waveguide lattice: drift toward an edge versus a static packet.

Run: python3 demos/single_photon_drift.py
"""

from __future__ import annotations

import numpy as np

from nhwalk import lattice
from nhwalk.experiments import single_walk

spec = lattice.reference_lattice()
for phi, label in ((0.0, "asymmetric (phi=0)"), (np.pi / 2, "symmetric (phi=pi/2)")):
    walk = single_walk(spec.with_(phase_phi=phi), n0=5, periods=range(0, 7))
    print(label)
    for k, row, c in zip(walk.periods, walk.normalized, walk.centers):
        bars = " ".join(f"{p:4.2f}" for p in row)
        print(f"  k={k}  centre {c + 1:5.2f}  |  {bars}")
    print(f"  surviving intensity after 6 periods: {walk.raw[-1].sum():.3f}\n")
