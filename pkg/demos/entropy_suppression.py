"""Second-order Renyi entropy of a photon pair with and without the skin effect.

Run: python3 demos/entropy_suppression.py
"""

from __future__ import annotations

import numpy as np

from nhwalk import lattice
from nhwalk.experiments import entropy_curve

spec = lattice.reference_lattice()
curves = {name: entropy_curve(spec.with_(phase_phi=phi), 4, 5, 15, method="transmission")
          for name, phi in (("0", 0.0), ("pi/8", np.pi / 8), ("pi/4", np.pi / 4), ("pi/2", np.pi / 2))}
bar = entropy_curve(spec, 4, 5, 15, method="similarity")

print(" k " + "".join(f"{'phi=' + n:>11}" for n in curves) + "   skin removed")
for k in range(0, 16, 3):
    print(f"{k:2d} " + "".join(f"{c.s2[k]:11.3f}" for c in curves.values()) + f"{bar.s2[k]:15.3f}")

ref = curves["pi/2"].s2
print("\nS_norm at k=15:", {n: round(float(c.s2[15] - ref[15]), 3) for n, c in curves.items()})
