"""Oracle comparisons behind the ``verify`` command and the acceptance tests.

Each check returns a :class:`CheckResult` whose ``artifact`` holds only
deterministic content (deviations printed with ``%.6e``, no timings), so two
runs of the suite can be compared byte for byte.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from . import oracle
from .geometry import PROFILE_PEAK, cmv_extent, compactified, extract_level_sets, fit_grid, size_asymptote
from .models import (
    HubbardParams,
    IsingParams,
    TfimParams,
    hubbard_propagator,
    hubbard_quench,
    ising_coherent,
    ising_dissipative,
    tfim_correlations,
)
from .models.hubbard import canted_theta, default_cutoff
from .runner import RunConfig, run
from .spin import ShapeLabel, classify_shape, pair_observables_from_density
from .states import preset_density, w3


def fmt(x: float) -> str:
    return "%.6e" % x


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    max_dev: float | None = None
    tolerance: float | None = None
    elapsed: float = 0.0
    budget: float | None = None
    artifact: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        dev = "" if self.max_dev is None else f" max|dev|={fmt(self.max_dev)} tol={fmt(self.tolerance)}"
        budget = "" if self.budget is None else f" budget={self.budget:.0f}s"
        return f"[{status}] criterion {self.number}: {self.name}{dev} time={self.elapsed:.2f}s{budget} :: {self.detail}"

    def artifact_bytes(self) -> bytes:
        doc = {"criterion": self.number, "name": self.name, "passed": self.passed, **self.artifact}
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _timed(number: int, name: str, budget: float | None, fn: Callable[[], tuple]) -> CheckResult:
    start = time.perf_counter()
    passed, detail, dev, tol, artifact = fn()
    elapsed = time.perf_counter() - start
    within = budget is None or elapsed < budget
    if not within:
        detail += f"; runtime {elapsed:.1f}s exceeds {budget:.0f}s"
    return CheckResult(number, name, bool(passed and within), detail, dev, tol, elapsed, budget, artifact)


def _maxdiff(*pairs) -> float:
    return max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) for a, b in pairs)


# ------------------------------------------------------------------------ 1


def check_states() -> CheckResult:
    tol = 1e-12

    def body():
        rows, failures, dev = {}, [], 0.0
        phi = pair_observables_from_density(preset_density("bell-phi+"))
        d = _maxdiff((phi.c_connected, np.diag([1.0, -1.0, 1.0])), (phi.b_i, 0 * phi.b_i))
        rows["bell-phi+ diag(1,-1,1)"] = fmt(d)
        dev = max(dev, d)
        target = np.array([1.0, 1.0, -1.0])
        for name in ("bell-phi+", "bell-phi-", "bell-psi+", "bell-psi-"):
            obs = pair_observables_from_density(preset_density(name))
            ev = np.sort(np.linalg.eigvalsh(obs.c_connected))
            d = float(np.max(np.abs(ev - np.sort(target))))
            rows[f"{name} spectrum vs (1,1,-1)"] = fmt(d)
            if d > tol:
                failures.append(f"{name} spectrum {np.round(ev, 12).tolist()}")
            dev = max(dev, d)
        ghz = pair_observables_from_density(preset_density("ghz3-pair"))
        d = _maxdiff((ghz.c_connected, np.diag([0.0, 0.0, 1.0])))
        rows["ghz3-pair diag(0,0,1)"] = fmt(d)
        dev = max(dev, d)
        for name, zz in (("mixed-zz", 1.0), ("mixed-updown", -1.0)):
            obs = pair_observables_from_density(preset_density(name))
            d = _maxdiff((obs.c_connected, np.diag([0.0, 0.0, zz])))
            label = classify_shape(obs.c_connected).label
            rows[f"{name} dumbbell"] = f"{fmt(d)} {label.value}"
            if label is not ShapeLabel.DUMBBELL:
                failures.append(f"{name} classified {label.value}")
            dev = max(dev, d)
        model = pair_observables_from_density(preset_density("w3-pair"))
        b_i, b_j, c = oracle.pair_expectations(oracle.partial_trace_pair(w3(), 3, 0, 1))
        d = _maxdiff((model.b_i, b_i), (model.b_j, b_j), (model.c_raw, c))
        rows["w3-pair vs partial trace"] = fmt(d)
        dev = max(dev, d)
        if dev > tol and not failures:
            failures.append("entry deviation above tolerance")
        passed = dev <= tol and not failures
        detail = "all prototype states exact" if passed else "; ".join(failures)
        return passed, detail, dev, tol, {"rows": rows}

    return _timed(1, "prototypical states", 1.0, body)


# ------------------------------------------------------------------------ 2


def check_coherent_ising() -> CheckResult:
    tol = 1e-10

    def body():
        rows, dev = {}, 0.0
        for th_name, th in (("pi/6", math.pi / 6), ("pi/4", math.pi / 4), ("pi/2", math.pi / 2)):
            for jt in (0.1, 0.5, 1.0, 2.0):
                for n in (1, 2, 3):
                    N = 2 * n + 4
                    i = (N - n) // 2
                    psi = oracle.ed_ising_evolve(N, th, 1.0, jt)
                    b_i, b_j, c = oracle.pair_expectations(oracle.partial_trace_pair(psi, N, i, i + n))
                    m = ising_coherent(IsingParams(J=1.0, theta=th, t=jt), n)
                    d = _maxdiff((m.b_i, b_i), (m.b_j, b_j), (m.c_raw, c), (m.c_connected, c - np.outer(b_i, b_j)))
                    rows[f"theta={th_name} Jt={jt} n={n}"] = fmt(d)
                    dev = max(dev, d)
        return dev < tol, f"{len(rows)} points vs state-vector evolution", dev, tol, {"rows": rows}

    return _timed(2, "coherent Ising vs ED", 10.0, body)


# ------------------------------------------------------------------------ 3


def check_dissipative_ising() -> CheckResult:
    tol = 1e-6
    limit_tol = 1e-12
    times = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5]

    def body():
        rows, dev = {}, 0.0
        N = 5
        for gamma in (0.1, 0.5, 1.0):
            rhos = oracle.lindblad_trajectory(N, math.pi / 2, 1.0, gamma, times)
            for t, rho in zip(times, rhos):
                for n in (1, 2):
                    b_i, b_j, c = oracle.pair_expectations(oracle.reduce_density(rho, N, 1, 1 + n))
                    m = ising_dissipative(IsingParams(J=1.0, theta=math.pi / 2, gamma=gamma, t=t), n)
                    d = _maxdiff((m.b_i, b_i), (m.b_j, b_j), (m.c_raw, c), (m.c_connected, c - np.outer(b_i, b_j)))
                    rows[f"gamma={gamma} Jt={t} n={n}"] = fmt(d)
                    dev = max(dev, d)
        lim = 0.0
        for t in times + [2.0, 3.0]:
            for n in (1, 2, 3):
                a = ising_dissipative(IsingParams(theta=math.pi / 2, gamma=0.0, t=t), n)
                b = ising_coherent(IsingParams(theta=math.pi / 2, t=t), n)
                lim = max(lim, _maxdiff((a.c_raw, b.c_raw), (a.b_i, b.b_i), (a.c_connected, b.c_connected)))
        rows["gamma=0 limit vs coherent"] = fmt(lim)
        passed = dev < tol and lim < limit_tol
        detail = f"RK4 5-spin oracle, gamma=0 limit dev {fmt(lim)} (tol {fmt(limit_tol)})"
        return passed, detail, dev, tol, {"rows": rows}

    return _timed(3, "dissipative Ising vs Lindblad RK4", 120.0, body)


# ------------------------------------------------------------------------ 4

HUBBARD_TIMES = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]


def hubbard_oracle_deviation(L: int, jt: float, pairs) -> dict:
    init = [np.array([math.cos(canted_theta(j) / 2), math.sin(canted_theta(j) / 2)]) for j in range(L)]
    ref = oracle.fock_hubbard_evolve(L, init, 1.0, jt, pairs)
    out = {}
    for (q, r), (b_q, b_r, c) in ref.items():
        m = hubbard_quench(HubbardParams(hopping=1.0, t=jt, q=q, r=r))
        out[(q, r)] = _maxdiff((m.b_i, b_q), (m.b_j, b_r), (m.c_raw, c), (m.c_connected, c - np.outer(b_q, b_r)))
    return out


def check_hubbard() -> CheckResult:
    tol = 1e-6
    unit_tol = 1e-10
    L = 6
    bulk = [(q, r) for q in range(1, L - 1) for r in range(q + 1, L - 1)]

    def body():
        rows, dev = {}, 0.0
        first_fail = None
        for jt in HUBBARD_TIMES:
            devs = hubbard_oracle_deviation(L, jt, bulk)
            worst = max(devs.values())
            for (q, r), d in devs.items():
                rows[f"L=6 Jt={jt} pair={q}-{r}"] = fmt(d)
            if worst >= tol and first_fail is None:
                first_fail = jt
            dev = max(dev, worst)
        unit = 0.0
        for z in np.linspace(0.0, 10.0, 41):
            cut = default_cutoff(1.0, z / 2)
            a = hubbard_propagator(0, np.arange(-cut, cut + 1), 1.0, z / 2)
            unit = max(unit, abs(float(np.sum(np.abs(a) ** 2)) - 1))
        rows["unitarity max deficit (2Jt<=10)"] = fmt(unit)
        # the same comparison on a larger lattice separates boundary error from formula error
        big = hubbard_oracle_deviation(8, 0.6, [(3, 4)])[(3, 4)]
        rows["L=8 Jt=0.6 centre pair 3-4"] = fmt(big)
        passed = dev < tol and unit <= unit_tol
        detail = f"unitarity deficit {fmt(unit)}"
        if first_fail is not None:
            detail += (
                f"; 6-site lattice exceeds tolerance from Jt={first_fail} "
                f"(8-site centre pair at Jt=0.6 deviates by {fmt(big)}: finite-lattice edge effect)"
            )
        return passed, detail, dev, tol, {"rows": rows}

    return _timed(4, "Hubbard quench vs Fock-space evolution", 120.0, body)


# ------------------------------------------------------------------------ 5

TFIM_POINTS = [(0.5, 1.0), (0.5, 4.0), (1.0, 1.0), (2.0, 1.0)]


def check_tfim(N: int = 12) -> CheckResult:
    tol = 5e-3

    def body():
        rows, dev = {}, 0.0
        cross_ok = True
        for g, T in TFIM_POINTS:
            ref = oracle.ed_thermal_tfim(N, g, T, 1.0, boundary="open", separations=(1, 2))
            for n in (1, 2):
                m = tfim_correlations(TfimParams(J=1.0, g=g, T=T, n=n))
                b_i, b_j, c = ref[n]
                d = _maxdiff((m.b_i, b_i), (m.b_j, b_j), (m.c_connected, c))
                off = m.c_connected[~np.eye(3, dtype=bool)]
                cross_ok &= bool(np.all(off == 0.0))
                rows[f"g={g} T={T} n={n}"] = fmt(d)
                dev = max(dev, d)
        oracle.clear_cache()
        detail = f"{N}-spin open-chain thermal ED, centre pair; cross components exactly zero: {cross_ok}"
        return dev < tol and cross_ok, detail, dev, tol, {"rows": rows}

    return _timed(5, "transverse-field Ising vs thermal ED", 300.0, body)


# ------------------------------------------------------------------------ 6


def random_symmetric(rng: np.random.Generator, lo: float = 0.05, hi: float = 0.2) -> np.ndarray:
    mags = rng.uniform(lo, hi, 3)
    signs = rng.choice([-1.0, 1.0], 3)
    r = Rotation.random(random_state=rng).as_matrix()
    return r @ np.diag(mags * signs) @ r.T


def check_geometry(count: int = 50, rotations: int = 20, P: float = 0.01, resolution: int = 96, seed: int = 20240601) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst_field = 0.0
        worst_haus = 0.0
        worst_extent = 0.0
        worst_mesh_extent = 0.0
        rows = {}
        for k in range(count):
            c = random_symmetric(rng)
            grid = fit_grid(c, P, resolution)
            meshes = extract_level_sets(c, P, grid)
            for m in meshes:
                if m.empty:
                    continue
                q = compactified(c, m.vertices) * m.sign
                worst_field = max(worst_field, float(np.max(np.abs(q - P))) / P)
            w, v = np.linalg.eigh(c)
            for lam, e in zip(w, v.T):
                if abs(lam) / P >= 10:
                    r_in, r_out, size = cmv_extent(c, e, P)
                    asym = size_asymptote(lam, P)
                    worst_extent = max(worst_extent, abs(size - asym) / asym)
                    mesh = meshes[0] if lam > 0 else meshes[1]
                    reach = float(np.max(np.abs(mesh.vertices @ e)))
                    worst_mesh_extent = max(worst_mesh_extent, abs(reach - r_out) / grid.spacing)
            if k < rotations:
                rot = Rotation.random(random_state=rng).as_matrix()
                rotated = extract_level_sets(rot.T @ c @ rot, P, grid)
                for m0, m1 in zip(meshes, rotated):
                    if m0.empty and m1.empty:
                        continue
                    if m0.empty != m1.empty:
                        worst_haus = float("inf")
                        continue
                    # level set of R^T C R is R^T applied to the level set of C
                    mapped = m0.vertices @ rot
                    d1 = cKDTree(m1.vertices).query(mapped)[0].max()
                    d2 = cKDTree(mapped).query(m1.vertices)[0].max()
                    worst_haus = max(worst_haus, max(d1, d2) / grid.spacing)
        rows["max |Q_f/P - 1| over vertices"] = fmt(worst_field)
        rows["max Hausdorff distance [cells]"] = fmt(worst_haus)
        rows["max relative extent vs asymptote"] = fmt(worst_extent)
        rows["max |mesh reach - r_out| [cells]"] = fmt(worst_mesh_extent)
        passed = worst_field <= 0.05 and worst_haus < 2 and worst_extent <= 0.05 and worst_mesh_extent < 2
        detail = (
            f"vertex field dev {fmt(worst_field)} (<=5e-2), Hausdorff {worst_haus:.3f} cells (<2), "
            f"extent vs asymptote {fmt(worst_extent)} (<=5e-2), mesh reach {worst_mesh_extent:.3f} cells"
        )
        return passed, detail, None, None, {"rows": rows}

    return _timed(6, "level-set geometry", 180.0, body)


# ------------------------------------------------------------------------ 7

ARCHETYPES = {
    ShapeLabel.ZERO: (0, 0),
    ShapeLabel.DUMBBELL: (1, 0),
    ShapeLabel.DISK: (2, 0),
    ShapeLabel.CLOVER: (2, 1),
    ShapeLabel.ELLIPSOID: (3, 0),
    ShapeLabel.WHEEL_AND_AXLE: (3, 1),
}


def archetype_matrix(label: ShapeLabel, rng: np.random.Generator) -> np.ndarray:
    rank, minority = ARCHETYPES[label]
    mags = np.zeros(3)
    mags[:rank] = rng.uniform(0.1, 1.0, rank)
    signs = np.ones(3)
    signs[:minority] = -1
    diag = mags * signs * rng.choice([-1.0, 1.0])
    rng.shuffle(diag)
    r = Rotation.random(random_state=rng).as_matrix()
    c = r @ np.diag(diag) @ r.T
    return 0.5 * (c + c.T)


def check_taxonomy(per_class: int = 1000, seed: int = 7) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        rows = {}
        bad = 0
        for label in ARCHETYPES:
            wrong = sum(classify_shape(archetype_matrix(label, rng)).label is not label for _ in range(per_class))
            rows[label.value] = f"{per_class - wrong}/{per_class}"
            bad += wrong
        return bad == 0, f"{bad} misclassified of {per_class * len(ARCHETYPES)}", None, None, {"rows": rows}

    return _timed(7, "shape taxonomy", 5.0, body)


# ------------------------------------------------------------------------ 8


def check_figure_sequence(P: float = 0.01, plane_cos: float = math.cos(math.radians(10))) -> CheckResult:
    """Labels of the tilted-ferromagnet sweep as they would appear at level ``P``.

    An eigenvalue is visible once its lobe exists, ``|lambda| * peak > P``;
    smaller eigenvalues are dropped before labelling. The clover plane is
    perpendicular to the Bloch vector when the dropped axis lies within 10
    degrees of it.
    """

    def body():
        cfg = RunConfig(
            command="ising",
            params={"theta": math.pi / 4, "J": 1.0},
            pairs=[(1, 2), (1, 3)],
            t_start=0.0,
            t_end=2.0,
            frames=40,
        )
        record = run(cfg).record
        visible = P / PROFILE_PEAK
        rows = {}
        nn_bad, nnn_bad, nn_seen, nnn_seen = [], [], 0, 0
        for frame in record["frames"]:
            for entry in frame["pairs"]:
                c = np.array(entry["c_connected"])
                w, v = np.linalg.eigh(0.5 * (c + c.T))
                keep = np.abs(w) > visible
                if not keep.any():
                    continue
                label = classify_shape(v @ np.diag(np.where(keep, w, 0.0)) @ v.T).label
                key = f"frame={frame['index']:02d} pair={entry['pair'][0]}-{entry['pair'][1]}"
                if entry["separation"] == 1:
                    nn_seen += 1
                    b = np.array(entry["b_i"])
                    normal = v[:, int(np.argmin(np.abs(w)))]
                    align = abs(float(b @ normal)) / float(np.linalg.norm(b))
                    ok = label is ShapeLabel.CLOVER and align >= plane_cos
                    rows[key] = f"{label.value} |b.n|={align:.4f}"
                    if not ok:
                        nn_bad.append(frame["index"])
                else:
                    nnn_seen += 1
                    rows[key] = label.value
                    if label is not ShapeLabel.DUMBBELL:
                        nnn_bad.append(frame["index"])
        passed = not nn_bad and not nnn_bad and nn_seen > 0 and nnn_seen > 0
        detail = (
            f"NN clover perpendicular to Bloch in {nn_seen - len(nn_bad)}/{nn_seen} visible frames; "
            f"NNN dumbbell in {nnn_seen - len(nnn_bad)}/{nnn_seen} visible frames"
        )
        if nn_bad:
            detail += f"; NN frames {nn_bad[0]}-{nn_bad[-1]} show a visible third axis (wheel-and-axle)"
        return passed, detail, None, None, {"rows": rows}

    return _timed(8, "tilted-ferromagnet figure sequence", None, body)


# ------------------------------------------------------------------------ 9

CHECKS: dict[int, Callable[[], CheckResult]] = {
    1: check_states,
    2: check_coherent_ising,
    3: check_dissipative_ising,
    4: check_hubbard,
    5: check_tfim,
    6: check_geometry,
    7: check_taxonomy,
    8: check_figure_sequence,
}


def check_determinism(first: dict[int, CheckResult]) -> CheckResult:
    """Re-run the given checks from a cold start and compare artifact bytes."""

    def body():
        oracle.clear_cache()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            second = {k: CHECKS[k]() for k in sorted(first)}
        diff = [k for k in sorted(first) if first[k].artifact_bytes() != second[k].artifact_bytes()]
        rows = {str(k): "identical" if k not in diff else "differs" for k in sorted(first)}
        detail = "artifacts byte-identical across two runs" if not diff else f"criteria {diff} differ"
        return not diff and bool(first), detail, None, None, {"rows": rows}

    return _timed(9, "determinism of verify artifacts", None, body)


def run_suite(selected=None, out_dir=None, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    """Run the selected criteria (all by default) and optionally write artifacts."""
    selected = sorted(set(selected or list(CHECKS) + [9]))
    results: dict[int, CheckResult] = {}
    for k in selected:
        if k == 9:
            continue
        results[k] = CHECKS[k]()
        if echo:
            echo(results[k].line())
    if 9 in selected:
        results[9] = check_determinism({k: v for k, v in results.items()})
        if echo:
            echo(results[9].line())
    if out_dir is not None:
        from .io import ensure_dir

        out = ensure_dir(out_dir)
        for k, res in sorted(results.items()):
            (out / f"criterion_{k}.json").write_bytes(res.artifact_bytes())
    return [results[k] for k in sorted(results)]


__all__ = ["CHECKS", "CheckResult", "run_suite"]
