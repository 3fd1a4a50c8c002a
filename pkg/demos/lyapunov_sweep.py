"""Lyapunov exponent of a single photon across the geometric phase.

Uses two worker processes when NHWALK_WORKERS=2 is set.
Run: python3 demos/lyapunov_sweep.py
"""

from __future__ import annotations

import numpy as np

from nhwalk import lattice
from nhwalk.experiments import lyapunov_sweep

phis = np.linspace(0, np.pi / 2, 5)
for phi, res in zip(phis, lyapunov_sweep(lattice.reference_lattice(), phis)):
    print(f"phi={phi:.4f}  lambda={res.per_period:+.4f} per period ({res.per_um:+.3e} per um)")
