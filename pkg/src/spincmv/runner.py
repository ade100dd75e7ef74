"""Turn a run configuration into a correlation record and mesh files.

Frames are evaluated concurrently (``SPINCMV_THREADS`` caps the pool) but
results are collected in frame order and written serially, so identical
configurations give byte-identical outputs.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as sio
from .errors import ConfigError
from .geometry import DEFAULT_LEVEL, GridSpec, extract_level_sets, fit_grid
from .models import (
    CONVENTION_MAP,
    HubbardParams,
    IsingParams,
    TfimParams,
    hubbard_quench,
    ising_coherent,
    ising_dissipative,
    tfim_correlations,
)
from .spin import PairObservables, classify_shape, irreducible_decompose, pair_observables_from_density
from .states import preset_density

MODELS = ("state", "ising", "ising-lindblad", "hubbard", "tfim")
FORMATS = ("json", "obj", "ply")


@dataclass
class RunConfig:
    """Everything needed to reproduce one run.

    ``pairs`` use 1-based site labels, so ``(1, 2)`` is a nearest-neighbour
    pair. Times are dimensionless (``Jt`` for Ising, hopping times ``t`` for
    Hubbard).
    """

    command: str
    params: dict = field(default_factory=dict)
    pairs: list = field(default_factory=lambda: [(1, 2)])
    t_start: float = 0.0
    t_end: float = 0.0
    frames: int = 1
    grid: GridSpec = field(default_factory=GridSpec)
    level: float = DEFAULT_LEVEL
    out_dir: str | None = None
    formats: tuple = ("json",)
    mesh: bool = False
    display_scale: float = 1.0
    fit_grid: bool = False
    check_refinement: bool = False
    density: np.ndarray | None = None

    def validate(self) -> None:
        if self.command not in MODELS:
            raise ConfigError(f"unknown model command {self.command!r}")
        if self.t_end < self.t_start:
            raise ConfigError("t_end must not precede t_start")
        if self.frames < 1:
            raise ConfigError("frames must be at least 1")
        if not self.formats:
            raise ConfigError("at least one output format is required")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown formats {sorted(bad)}")
        if not self.level > 0:
            raise ConfigError("level P must be positive")
        if not self.display_scale > 0:
            raise ConfigError("display scale must be positive")
        for p in self.pairs:
            if len(p) != 2 or p[0] == p[1] or min(p) < 1:
                raise ConfigError(f"invalid pair {p!r}; use distinct 1-based sites like 1:2")

    def times(self) -> list[float]:
        if self.frames == 1:
            return [float(self.t_start)]
        return [float(t) for t in np.linspace(self.t_start, self.t_end, self.frames)]


def thread_count() -> int:
    raw = os.environ.get("SPINCMV_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SPINCMV_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _observe(cfg: RunConfig, pair, t: float) -> PairObservables:
    p = cfg.params
    for key in ("J", "hopping"):
        if key in p and not float(p[key]) > 0:
            raise ConfigError(f"{key} must be positive to define dimensionless times")
    i, j = pair
    n = abs(j - i)
    if cfg.command == "state":
        rho = cfg.density if cfg.density is not None else preset_density(p.get("name", "bell-phi+"))
        return pair_observables_from_density(rho)
    if cfg.command == "ising":
        J = float(p.get("J", 1.0))
        return ising_coherent(IsingParams(J=J, theta=float(p.get("theta", math.pi / 2)), t=t / J), n)
    if cfg.command == "ising-lindblad":
        J = float(p.get("J", 1.0))
        gamma = float(p.get("gamma", 0.0)) * J
        prm = IsingParams(J=J, theta=float(p.get("theta", math.pi / 2)), gamma=gamma, t=t / J)
        return ising_dissipative(prm, n)
    if cfg.command == "hubbard":
        hop = float(p.get("hopping", 1.0))
        prm = HubbardParams(
            hopping=hop,
            t=t / hop,
            q=i - 1,
            r=j - 1,
            initial_state=p.get("initial_state", "canted"),
            bessel_cutoff=p.get("bessel_cutoff"),
        )
        return hubbard_quench(prm)
    if cfg.command == "tfim":
        prm = TfimParams(
            J=float(p.get("J", 1.0)),
            g=float(p.get("g", 0.5)),
            T=float(p.get("T", 1.0)),
            n=n,
            quad_points=int(p.get("quad_points", 1024)),
        )
        return tfim_correlations(prm)
    raise ConfigError(f"unknown model command {cfg.command!r}")


def _frame(cfg: RunConfig, index: int, t: float):
    entries, meshes = [], []
    for pair in cfg.pairs:
        obs = _observe(cfg, pair, t)
        c = obs.c_connected
        sym = 0.5 * (c + c.T)
        shape = classify_shape(sym)
        parts = irreducible_decompose(c)
        names = []
        if cfg.mesh:
            grid = fit_grid(sym, cfg.level, cfg.grid.resolution) if cfg.fit_grid else cfg.grid
            pos, neg = extract_level_sets(sym, cfg.level, grid, cfg.check_refinement)
            for m in (pos, neg):
                for fmt in cfg.formats:
                    if fmt == "json":
                        continue
                    name = sio.mesh_filename(index, pair, m.sign, fmt)
                    names.append(name)
                    meshes.append((name, m, fmt))
        entry = sio.pair_entry(pair, obs, shape, parts, names)
        entry["meta_flags"] = {
            k: v for k, v in sorted(obs.meta.items()) if k in ("unvalidated_regime", "bessel_cutoff")
        }
        entries.append(entry)
    return {"index": index, "time": t, "pairs": entries}, meshes


def _metadata(cfg: RunConfig) -> dict:
    meta = {
        "model": cfg.command,
        "params": dict(sorted(cfg.params.items())),
        "pairs": [list(p) for p in cfg.pairs],
        "time_grid": {"t_start": cfg.t_start, "t_end": cfg.t_end, "frames": cfg.frames},
        "level": cfg.level,
        "grid": {"half_extent": cfg.grid.half_extent, "resolution": cfg.grid.resolution, "fit": cfg.fit_grid},
        "display_scale": cfg.display_scale,
        "axis_order": "xyz",
        "pair_labels": "1-based sites",
    }
    if cfg.command == "tfim":
        meta["convention_map"] = CONVENTION_MAP
    if cfg.command == "ising-lindblad":
        theta = float(cfg.params.get("theta", math.pi / 2))
        meta["unvalidated_regime"] = abs(theta - math.pi / 2) > 1e-12
    return meta


@dataclass
class RunResult:
    record: dict
    files: list


def run(cfg: RunConfig) -> RunResult:
    cfg.validate()
    times = cfg.times()
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda it: _frame(cfg, *it), enumerate(times)))
    frames = [r[0] for r in results]
    record = sio.make_record(_metadata(cfg), frames)
    sio.validate_record(record)
    files = []
    if cfg.out_dir is not None:
        out = sio.ensure_dir(cfg.out_dir)
        # the record is always written; formats only select mesh encodings
        path = Path(out) / "record.json"
        sio.write_record(record, path)
        files.append(path)
        for _, meshes in results:
            for name, mesh, fmt in meshes:
                path = Path(out) / name
                scaled = mesh.scaled(cfg.display_scale) if cfg.display_scale != 1.0 else mesh
                sio.write_mesh(scaled, fmt, path)
                files.append(path)
    return RunResult(record, files)
