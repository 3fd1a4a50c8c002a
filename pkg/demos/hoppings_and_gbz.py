"""Effective Floquet hoppings, the non-Bloch circle and the skin depth.

Run: python3 demos/hoppings_and_gbz.py
"""

from __future__ import annotations

from nhwalk import lattice
from nhwalk.experiments import gbz_for_spec, table1
from nhwalk.lattice import Boundary
from nhwalk.nonbloch import skin_depth

ring = lattice.reference_lattice(n_straight=10, boundary=Boundary.RING)
h = table1(ring)
print("bulk hoppings kappa_d (hop from n to n + d), units 1e-4 / um")
for d, k in zip(h.orders, h.kappa):
    print(f"  d={d:+d}  {k.real * 1e4:+9.4f} {k.imag * 1e4:+9.4f}i")

_, obc, curve = gbz_for_spec(lattice.reference_lattice())
print(f"\nGBZ circle radius {curve.fitted_radius:.4f} (relative residual {curve.relative_residual:.2%})")
print(f"skin depth g = {skin_depth(curve):.3f}; the similarity transform rescales site n by e^(-g n)")
e = obc.eigenvalues
print(f"OBC spectrum (N=30): max|Re E| = {abs(e.real).max():.1e}, Im E in [{e.imag.min():.4f}, {e.imag.max():.4f}]")
