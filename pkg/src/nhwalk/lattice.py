"""Lattice geometry of the interleaved straight/auxiliary waveguide array.

Sites are stored in interleaved order ``s0, x0, s1, x1, ...`` where ``s`` are
straight waveguides and ``x`` auxiliary ones.  Auxiliary waveguide ``j`` sits
between straight ``j`` (left) and straight ``j + 1`` (right, modulo N on a
ring).  Its transverse offset ``R sin(2 pi z / T + phi)`` widens the left gap
and narrows the right gap.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ConfigurationError, DomainError

GEOMETRY_NOTE = (
    "auxiliary centre line midway between straight neighbours at rest; "
    "left gap = a + R sin(2 pi z/T + phi), right gap = a - R sin(2 pi z/T + phi); "
    "couplings enter H(z) as -kappa(gap); no direct straight-straight hopping"
)


class Boundary(str, enum.Enum):
    OPEN = "open"
    RING = "ring"


class SiteKind(str, enum.Enum):
    STRAIGHT = "straight"
    AUXILIARY = "auxiliary"


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry and coupling law of one lattice.  Lengths in um, angles in rad."""

    n_straight: int = 9
    boundary: Boundary = Boundary.OPEN
    spacing_a: float = 0.9
    radius_R: float = 0.21
    period_T: float = 40.0
    phase_phi: float = 0.0
    coupling_A: float = 13.99
    coupling_b: float = 8.26
    onsite_beta0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.n_straight < 2:
            raise ConfigurationError(f"n_straight must be >= 2, got {self.n_straight}")
        if not self.period_T > 0:
            raise ConfigurationError(f"period_T must be positive, got {self.period_T}")
        if self.coupling_A < 0 or not self.coupling_b > 0:
            raise ConfigurationError("coupling_A must be >= 0 and coupling_b > 0")
        if not abs(self.radius_R) < self.spacing_a:
            raise ConfigurationError(
                f"radius_R={self.radius_R} must be smaller than spacing_a={self.spacing_a}; "
                "the auxiliary waveguide would touch a straight one"
            )

    @property
    def n_aux(self) -> int:
        return self.n_straight if self.boundary is Boundary.RING else self.n_straight - 1

    @property
    def n_sites(self) -> int:
        return self.n_straight + self.n_aux

    @property
    def omega(self) -> float:
        return 2 * np.pi / self.period_T

    def with_(self, **changes) -> "LatticeSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["boundary"] = self.boundary.value
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "LatticeSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown lattice keys: {sorted(unknown)}")
        kwargs = dict(d)
        for key in ("spacing_a", "radius_R", "period_T", "phase_phi", "coupling_A",
                    "coupling_b", "onsite_beta0"):
            if key in kwargs:
                kwargs[key] = float(kwargs[key])
        if "n_straight" in kwargs:
            kwargs["n_straight"] = int(kwargs["n_straight"])
        return cls(**kwargs)


def reference_lattice(**changes) -> LatticeSpec:
    """The fabricated-device parameters (a=0.9, R=0.21, T=40, A=13.99, b=8.26, N=9)."""
    return LatticeSpec(**changes)


@dataclass(frozen=True)
class SiteIndex:
    kind: SiteKind
    ordinal: int
    flat: int = field(compare=False)


def site_from_flat(flat: int, spec: LatticeSpec) -> SiteIndex:
    if not 0 <= flat < spec.n_sites:
        raise DomainError(f"flat index {flat} outside 0..{spec.n_sites - 1}")
    kind = SiteKind.STRAIGHT if flat % 2 == 0 else SiteKind.AUXILIARY
    return SiteIndex(kind, flat // 2, flat)


def flat_index(kind: SiteKind | str, ordinal: int, spec: LatticeSpec) -> int:
    kind = SiteKind(kind)
    limit = spec.n_straight if kind is SiteKind.STRAIGHT else spec.n_aux
    if not 0 <= ordinal < limit:
        raise DomainError(f"{kind.value} ordinal {ordinal} outside 0..{limit - 1}")
    return 2 * ordinal + (kind is SiteKind.AUXILIARY)


def straight_indices(spec: LatticeSpec) -> np.ndarray:
    return np.arange(0, 2 * spec.n_straight, 2)


def aux_indices(spec: LatticeSpec) -> np.ndarray:
    return np.arange(1, 2 * spec.n_aux, 2)


def coupling_strength(distance, spec: LatticeSpec):
    """Evanescent coupling A exp(-b x) between two waveguides ``distance`` apart."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise DomainError(f"coupling distance must be positive, got {distance}")
    out = spec.coupling_A * np.exp(-spec.coupling_b * d)
    return float(out) if out.ndim == 0 else out


def aux_offset(z, spec: LatticeSpec):
    return spec.radius_R * np.sin(spec.omega * np.asarray(z, dtype=float) + spec.phase_phi)


def gaps(z: float, spec: LatticeSpec) -> tuple[float, float]:
    """(left, right) centre distances of every auxiliary waveguide at ``z``."""
    off = float(aux_offset(z, spec))
    left, right = spec.spacing_a + off, spec.spacing_a - off
    if left <= 0 or right <= 0:
        raise ConfigurationError(f"non-positive gap at z={z}: left={left}, right={right}")
    return left, right


def coupling_patterns(spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric 0/1 adjacency of left and right auxiliary bonds.

    ``H(z) = -kappa_left(z) * P_left - kappa_right(z) * P_right + beta0 * I``.
    """
    m = spec.n_sites
    p_left = np.zeros((m, m))
    p_right = np.zeros((m, m))
    for j in range(spec.n_aux):
        aux = 2 * j + 1
        left = 2 * j
        right = (2 * j + 2) % m
        p_left[left, aux] = p_left[aux, left] = 1.0
        p_right[right, aux] = p_right[aux, right] = 1.0
    return p_left, p_right


def bond_couplings(z: float, spec: LatticeSpec) -> tuple[float, float]:
    left, right = gaps(z, spec)
    return coupling_strength(left, spec), coupling_strength(right, spec)


def instantaneous_hamiltonian(z: float, spec: LatticeSpec) -> np.ndarray:
    """Real symmetric M x M coupled-mode matrix H(z) in interleaved order."""
    p_left, p_right = coupling_patterns(spec)
    k_left, k_right = bond_couplings(z, spec)
    h = -k_left * p_left - k_right * p_right
    h[np.diag_indices_from(h)] = spec.onsite_beta0
    return h


def mirror_permutation(m: int) -> np.ndarray:
    return np.arange(m)[::-1]


def load_spec(path: str | Path) -> LatticeSpec:
    data = yaml.safe_load(Path(path).read_text()) or {}
    return LatticeSpec.from_dict(data.get("lattice", data))


def dump_spec(spec: LatticeSpec, path: str | Path | None = None) -> str:
    text = yaml.safe_dump(
        {"lattice": spec.to_dict(), "geometry": GEOMETRY_NOTE}, sort_keys=False
    )
    if path is not None:
        Path(path).write_text(text)
    return text
