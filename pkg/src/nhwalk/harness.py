"""Run configuration, experiment dispatch, deterministic export and manifests.

Sites are 1-based in every config file and exported table; everything below
this layer is 0-based.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from . import __version__
from . import acceptance
from . import experiments as ex
from .errors import ConfigurationError, NHWalkError
from .floquet import DEFAULT_STEPS
from .lattice import GEOMETRY_NOTE, Boundary, LatticeSpec
from .nonbloch import GBZ_ORDERS, GBZ_RING, TABLE_ORDERS, gbz_for_spec, skin_depth

EXPERIMENTS = ("single_walk", "pair_walk", "lyapunov_sweep", "spectra", "gbz",
               "entropy_curve", "table1")

# Which published dataset each experiment regenerates (recorded in manifests).
DATASETS = {
    "single_walk": "single-photon intensity distributions at z = 3T..6T, N = 9",
    "pair_walk": "two-photon coincidence matrices at z = 3T..6T, N = 9",
    "lyapunov_sweep": "Lyapunov exponent versus geometric phase, N = 30",
    "spectra": "PBC loop and OBC spectrum of the effective Hamiltonian, N = 30",
    "gbz": "generalized Brillouin zone on the complex beta plane",
    "entropy_curve": "second-order Renyi entropy versus period, up to 40T",
    "table1": "bulk hopping amplitudes of the ring effective Hamiltonian, N = 10",
}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "single_walk": {"injection": [6], "periods": [3, 4, 5, 6]},
    "pair_walk": {"injection": [5, 6], "periods": [3, 4, 5, 6]},
    "lyapunov_sweep": {"phis": [0.0, np.pi / 8, np.pi / 4, 3 * np.pi / 8, np.pi / 2],
                       "n_sites": 30, "window": [20, 40]},
    "spectra": {"n_sites": 30},
    "gbz": {"n_sites": 30},
    "entropy_curve": {"injection": [5, 6], "periods": [40],
                      "phis": [0.0, np.pi / 4, np.pi / 2]},
    "table1": {"n_sites": 10},
}

_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(value) -> float:
    """Accept plain numbers or strings such as ``pi/4``, ``3pi/8``, ``-0.5*pi``."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise ConfigurationError(f"cannot read angle {value!r}")
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else (-1.0 if coef == "-" else float(coef))
    den = float(m.group(2)) if m.group(2) else 1.0
    return coef * np.pi / den


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    spec: LatticeSpec = field(default_factory=LatticeSpec)
    injection: tuple[int, ...] = ()  # 1-based straight sites
    periods: tuple[int, ...] = ()
    phis: tuple[float, ...] = ()
    n_sites: int | None = None  # lattice size for N=30 / ring analyses
    window: tuple[int, int] = (20, 40)
    method: str = "master"
    out_dir: Path = Path("results")
    fmt: str = "csv"
    steps: int = DEFAULT_STEPS
    tolerances: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(
                f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.fmt not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.fmt!r}")
        if self.steps < 1:
            raise ConfigurationError("steps_per_period must be positive")
        if any(k < 0 for k in self.periods):
            raise ConfigurationError("periods must be non-negative")
        for s in self.injection:
            if not 1 <= s <= self.spec.n_straight:
                raise ConfigurationError(
                    f"injection site {s} outside 1..{self.spec.n_straight} (sites are 1-based)")
        if self.method not in ("master", "transmission"):
            raise ConfigurationError(f"pair method must be master or transmission, got {self.method!r}")
        k1, k2 = self.window
        if not 0 <= k1 < k2:
            raise ConfigurationError(f"window must satisfy 0 <= k1 < k2, got {self.window}")
        if self.experiment in ("single_walk", "pair_walk", "entropy_curve") and not self.periods:
            raise ConfigurationError(f"{self.experiment} needs at least one period")
        need = {"single_walk": 1, "pair_walk": 2, "entropy_curve": 2}.get(self.experiment)
        if need and len(self.injection) != need:
            raise ConfigurationError(f"{self.experiment} needs {need} injection site(s)")

    @classmethod
    def build(cls, experiment: str, lattice: dict | None = None, **run) -> "RunConfig":
        """Fill experiment defaults, then apply explicit settings."""
        if experiment not in EXPERIMENTS:
            raise ConfigurationError(
                f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        merged = dict(_DEFAULTS[experiment])
        merged.update({k: v for k, v in run.items() if v is not None})
        known = {"injection", "periods", "phis", "n_sites", "window", "method", "out",
                 "format", "steps_per_period", "tolerances"}
        unknown = set(merged) - known
        if unknown:
            raise ConfigurationError(f"unknown run keys: {sorted(unknown)}")
        try:
            return cls(
                experiment=experiment,
                spec=LatticeSpec.from_dict(lattice or {}),
                injection=tuple(int(s) for s in merged.get("injection", ())),
                periods=tuple(int(k) for k in merged.get("periods", ())),
                phis=tuple(parse_angle(p) for p in merged.get("phis", ())),
                n_sites=int(merged["n_sites"]) if merged.get("n_sites") is not None else None,
                window=tuple(int(k) for k in merged.get("window", (20, 40))),
                method=str(merged.get("method", "master")),
                out_dir=Path(merged.get("out", "results")),
                fmt=str(merged.get("format", "csv")),
                steps=int(merged.get("steps_per_period", DEFAULT_STEPS)),
                tolerances={k: float(v) for k, v in (merged.get("tolerances") or {}).items()},
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, NHWalkError):
                raise
            raise ConfigurationError(f"bad run setting: {exc}") from exc

    def echo(self) -> dict[str, Any]:
        """Resolved configuration as plain data (output directory excluded)."""
        return {
            "experiment": self.experiment,
            "lattice": self.spec.to_dict(),
            "geometry": GEOMETRY_NOTE,
            "injection": list(self.injection),
            "periods": list(self.periods),
            "phis": [float(p) for p in self.phis],
            "n_sites": self.n_sites,
            "window": list(self.window),
            "method": self.method,
            "format": self.fmt,
            "steps_per_period": self.steps,
            "tolerances": dict(sorted(self.tolerances.items())),
        }

    @property
    def run_id(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def read_config(path: str | Path) -> tuple[dict, dict]:
    """Raw ``lattice`` and ``run`` sections of a YAML config file."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping with lattice/run sections")
    unknown = set(data) - {"lattice", "run", "geometry"}
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
    lattice, run = data.get("lattice") or {}, data.get("run") or {}
    if not isinstance(lattice, dict) or not isinstance(run, dict):
        raise ConfigurationError("lattice and run sections must be mappings")
    return dict(lattice), dict(run)


def load_config(path: str | Path, experiment: str | None = None, **overrides) -> RunConfig:
    """Read a YAML file with ``lattice:`` and ``run:`` sections."""
    lattice, run = read_config(path)
    exp = experiment or run.get("experiment")
    run.pop("experiment", None)
    if exp is None:
        raise ConfigurationError("config names no experiment")
    run.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.build(exp, lattice, **run)


@dataclass
class RunManifest:
    run_id: str
    config: dict[str, Any]
    version: str
    wall_time: float
    files: dict[str, str]  # file name -> sha256
    dataset: str = ""
    summary: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"run_id": self.run_id, "version": self.version, "dataset": self.dataset,
                "wall_time_s": round(self.wall_time, 3), "config": self.config,
                "files": dict(sorted(self.files.items())), "summary": self.summary}


# ---------------------------------------------------------------- export ----

def _num(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def json_text(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


class _Writer:
    """Writes files into one directory and can undo everything it wrote."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.created_dir = not out_dir.exists()
        self.files: dict[str, str] = {}

    def write(self, name: str, text: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        data = text.encode()
        path.write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()
        return path

    def table(self, stem: str, fmt: str, header: Sequence[str], rows: Sequence[Sequence],
              meta: dict | None = None):
        if fmt == "csv":
            self.write(f"{stem}.csv", csv_text(header, rows))
        else:
            records = [dict(zip(header, r)) for r in rows]
            self.write(f"{stem}.json", json_text({"meta": meta or {}, "rows": records}))

    def rollback(self):
        for name in self.files:
            (self.out_dir / name).unlink(missing_ok=True)
        self.files.clear()
        if self.created_dir:
            try:
                self.out_dir.rmdir()
            except OSError:
                pass


def _complex_rows(values: np.ndarray, label: str | None = None):
    return [([label] if label else []) + [float(z.real), float(z.imag)] for z in values]


def _sites(cfg: RunConfig) -> list[int]:
    return [s - 1 for s in cfg.injection]


def _run_single(cfg: RunConfig, w: _Writer) -> dict:
    (n0,) = _sites(cfg)
    walk = ex.single_walk(cfg.spec, n0, cfg.periods, cfg.steps)
    rows = []
    for i, k in enumerate(walk.periods):
        for site in range(cfg.spec.n_straight):
            rows.append([k, site + 1, float(walk.raw[i, site]), float(walk.normalized[i, site])])
    w.table("intensity", cfg.fmt, ["period", "site", "intensity", "normalized"], rows)
    centers = {int(k): float(c) + 1 for k, c in zip(walk.periods, walk.centers)}
    return {"packet_center": centers, "injection": cfg.injection[0]}


def _run_pair(cfg: RunConfig, w: _Writer) -> dict:
    n0, m0 = _sites(cfg)
    mats = ex.pair_walk(cfg.spec, n0, m0, cfg.periods, cfg.method, cfg.steps)
    survival = {}
    n = cfg.spec.n_straight
    for k, g in mats.items():
        norm = g.normalized
        rows = [[i + 1, j + 1, float(g.gamma[i, j]), float(norm[i, j])]
                for i in range(n) for j in range(n)]
        w.table(f"correlation_k{k:03d}", cfg.fmt, ["site_n", "site_m", "gamma", "normalized"], rows,
                {"period": k, "survival_p2": g.survival_p2})
        survival[k] = g.survival_p2
    return {"survival_p2": survival, "method": cfg.method,
            "convention": "ordered pairs: off-diagonal entries hold half the pair probability"}


def _run_lyapunov(cfg: RunConfig, w: _Writer) -> dict:
    n = cfg.n_sites or 30
    res = ex.lyapunov_sweep(cfg.spec, cfg.phis, n, cfg.window, cfg.steps)
    rows = [[float(p), r.per_period, r.per_um, r.site + 1] for p, r in zip(cfg.phis, res)]
    w.table("lyapunov", cfg.fmt, ["phi", "per_period", "per_um", "site"], rows)
    return {"n_straight": n, "window": list(cfg.window)}


def _run_spectra(cfg: RunConfig, w: _Writer) -> dict:
    sp = ex.spectra(cfg.spec, cfg.n_sites or 30, steps=cfg.steps)
    rows = _complex_rows(sp.pbc, "PBC") + _complex_rows(sp.obc, "OBC")
    w.table("spectra", cfg.fmt, ["kind", "re", "im"], rows)
    return {"pbc_loop_area": sp.pbc_area, "hopping_orders": list(sp.hopping_orders),
            "ring_size": GBZ_RING}


def _run_gbz(cfg: RunConfig, w: _Writer) -> dict:
    h, obc, curve = gbz_for_spec(cfg.spec, cfg.n_sites or 30, steps=cfg.steps)
    energies = np.repeat(curve.energies, 2)
    rows = [[float(e.real), float(e.imag), float(b.real), float(b.imag), float(abs(b))]
            for e, b in zip(energies, curve.betas)]
    w.table("gbz", cfg.fmt, ["energy_re", "energy_im", "beta_re", "beta_im", "beta_abs"], rows)
    summary = {"fitted_radius": curve.fitted_radius, "circle_residual": curve.circle_residual,
               "skipped": curve.skipped, "tolerance": curve.tolerance,
               "hopping_orders": list(GBZ_ORDERS), "ring_size": GBZ_RING}
    try:
        summary["skin_depth_g"] = skin_depth(curve)
    except NHWalkError as exc:
        summary["skin_depth_g"] = None
        summary["skin_depth_note"] = str(exc)
    return summary


def _run_entropy(cfg: RunConfig, w: _Writer) -> dict:
    n0, m0 = _sites(cfg)
    k_max = max(cfg.periods)
    sym = ex.entropy_curve(cfg.spec.with_(phase_phi=np.pi / 2), n0, m0, k_max, steps=cfg.steps)
    rows = []
    for phi in cfg.phis:
        cur = sym if phi == np.pi / 2 else ex.entropy_curve(
            cfg.spec.with_(phase_phi=phi), n0, m0, k_max, steps=cfg.steps)
        for k in range(1, k_max + 1):
            rows.append([float(phi), k, float(cur.s2[k]), float(sym.s2[k]),
                         float(cur.s2[k] - sym.s2[k]), float(cur.survival_p2[k]),
                         float(cur.s2_exact[k])])
    w.table("entropy", cfg.fmt,
            ["phi", "k", "s2", "s2_sym", "s_norm", "survival_p2", "s2_exact"], rows)
    return {"estimator": "diagonal on post-selected coincidences; s2_exact keeps coherences",
            "reference_phi": float(np.pi / 2)}


def _run_table1(cfg: RunConfig, w: _Writer) -> dict:
    n = cfg.n_sites or 10
    spec = cfg.spec.with_(boundary=Boundary.RING)
    h = ex.table1(spec, n, TABLE_ORDERS, cfg.steps)
    rows = [[int(o), float(k.real), float(k.imag), float(k.imag) * 1e4] for o, k in zip(h.orders, h.kappa)]
    w.table("hoppings", cfg.fmt, ["order", "re", "im", "im_1e-4_per_um"], rows)
    return {"ring_size": n, "circulant_residual": h.circulant_residual,
            "convention": "kappa[d] = amplitude for hopping from site n to site n + d"}


_RUNNERS = {
    "single_walk": _run_single,
    "pair_walk": _run_pair,
    "lyapunov_sweep": _run_lyapunov,
    "spectra": _run_spectra,
    "gbz": _run_gbz,
    "entropy_curve": _run_entropy,
    "table1": _run_table1,
}


def _fail(stage: str, exc: Exception) -> Exception:
    if isinstance(exc, NHWalkError):
        return type(exc)(f"[{stage}] {exc}")
    return exc


def run(cfg: RunConfig) -> RunManifest:
    """Execute one experiment; on any error every file written so far is removed."""
    t0 = time.perf_counter()
    w = _Writer(Path(cfg.out_dir))
    try:
        summary = _RUNNERS[cfg.experiment](cfg, w)
        summary_text = json_text({"run_id": cfg.run_id, "config": cfg.echo(), "summary": summary,
                                  "dataset": DATASETS[cfg.experiment], "version": __version__})
        w.write("result.json", summary_text)
        manifest = RunManifest(cfg.run_id, cfg.echo(), __version__, time.perf_counter() - t0,
                               dict(w.files), DATASETS[cfg.experiment], _jsonable(summary))
        w.write("manifest.json", json_text(manifest.to_dict()))
    except Exception as exc:
        w.rollback()
        raise _fail(cfg.experiment, exc) from exc
    return manifest


def reproduce_all(out_dir: str | Path = "results/acceptance", tolerances: dict | None = None,
                  fault: str | None = None, only: list[int] | None = None,
                  steps: int = DEFAULT_STEPS) -> tuple[RunManifest, list]:
    """Run the acceptance suite and write a one-line-per-criterion report."""
    t0 = time.perf_counter()
    results = acceptance.run_all(tolerances, fault, only, steps)
    w = _Writer(Path(out_dir))
    w.write("acceptance_report.txt", acceptance.report(results))
    payload = [{"number": r.number, "name": r.name, "passed": r.passed,
                "informational": r.informational, "detail": r.detail,
                "thresholds": r.thresholds, "values": r.values} for r in results]
    w.write("acceptance.json", json_text({"criteria": payload}))
    config = {"tolerances": dict(sorted((tolerances or {}).items())), "fault": fault,
              "only": only, "steps_per_period": steps}
    run_id = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:12]
    manifest = RunManifest(run_id, config, __version__, time.perf_counter() - t0, dict(w.files),
                           "acceptance suite",
                           {"passed": [r.number for r in results if r.passed and not r.informational],
                            "failed": [r.number for r in results if not r.passed]})
    w.write("manifest.json", json_text(manifest.to_dict()))
    return manifest, results
