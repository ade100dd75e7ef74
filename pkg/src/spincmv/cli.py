"""Command line interface: ``spincmv <command> [options]``.

Model commands (``state``, ``ising``, ``ising-lindblad``, ``hubbard``,
``tfim``) write a ``record.json`` and, with ``--mesh``, one positive and one
negative mesh per pair and frame. Failures are reported on stderr as a JSON
object carrying the error code and the process exit code.
"""

from __future__ import annotations

import ast
import json
import math
import operator
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import io as sio
from .errors import ConfigError, IoError, ParseError, SpinCMVError
from .geometry import DEFAULT_LEVEL, GridSpec, extract_level_sets, fit_grid
from .runner import FORMATS, RunConfig, run
from .spin import classify_shape, irreducible_decompose, pair_observables_from_density, split_symmetric_antisymmetric
from .states import PRESETS

DEFAULT_OUT = "spincmv_out"

# ------------------------------------------------------------------ parsing helpers

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "tau": math.tau, "e": math.e}


def eval_number(text: str) -> float:
    """Evaluate a small arithmetic expression such as ``pi/4`` or ``3*pi/8``."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported element {ast.dump(node)}")

    try:
        value = walk(ast.parse(str(text).strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(f"cannot evaluate {text!r}: {exc}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{text!r} is not finite")
    return value


def parse_pairs(text: str) -> list[tuple[int, int]]:
    """``"1:2,1:3"`` -> ``[(1, 2), (1, 3)]`` (1-based site labels)."""
    pairs = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            i, j = (int(s) for s in chunk.split(":"))
        except ValueError:
            raise ConfigError(f"bad pair {chunk!r}; expected i:j such as 1:2") from None
        pairs.append((i, j))
    if not pairs:
        raise ConfigError("no pairs given")
    return pairs


def parse_formats(text: str) -> tuple[str, ...]:
    fmts = tuple(f.strip() for f in str(text).split(",") if f.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if bad or not fmts:
        raise ConfigError(f"formats must be a non-empty subset of {list(FORMATS)}, got {text!r}")
    return fmts


def parse_matrix(text: str) -> np.ndarray:
    """``"a,b,c;d,e,f;g,h,i"`` -> 3x3 array (rows separated by ``;``)."""
    try:
        rows = [[eval_number(v) for v in row.split(",")] for row in str(text).split(";")]
        m = np.array(rows, dtype=float)
    except ValueError:
        raise ConfigError(f"matrix rows must have equal length: {text!r}") from None
    if m.shape != (3, 3):
        raise ConfigError(f"matrix must be 3x3, got shape {m.shape}")
    return m


def parse_params(items) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"bad --param {item!r}; expected KEY=VALUE")
        out[key.strip()] = eval_number(value)
    return out


# ------------------------------------------------------------------ config files


def _config_value(value):
    """Turn JSON list values into the comma syntax the flags accept."""
    if isinstance(value, list):
        parts = []
        for v in value:
            parts.append(":".join(str(x) for x in v) if isinstance(v, list) else str(v))
        return ",".join(parts)
    return value


def _load_config(ctx: click.Context, param, value):
    if value is None:
        return None
    try:
        doc = json.loads(Path(value).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read config {value}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"malformed config {value}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    name = ctx.command.name
    commands = set(cli.commands)
    if doc and set(doc) <= commands:
        doc = doc.get(name, {})
        if not isinstance(doc, dict):
            raise ConfigError(f"config section {name!r} must be an object")
    allowed = {p.name: p for p in ctx.command.params if p.name != "config"}
    defaults = {}
    for key, val in doc.items():
        pname = str(key).lstrip("-").replace("-", "_").lower()
        if pname not in allowed:
            raise ConfigError(f"unknown config key {key!r} for command {name!r}")
        defaults[pname] = _config_value(val)
    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


def _emit_error(code: str, message: str, exit_code: int) -> None:
    doc = {"error": code, "message": message, "exit_code": exit_code}
    click.echo(json.dumps(doc, sort_keys=True), err=True)


class SpinGroup(click.Group):
    """Group that turns every failure into a JSON error line and exit code."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else 0
        except click.exceptions.Exit as exc:
            code = exc.exit_code
        except click.ClickException as exc:
            code = exc.exit_code
            _emit_error("UsageError", exc.format_message(), code)
        except click.Abort:
            code = 1
            _emit_error("Aborted", "aborted", code)
        except SpinCMVError as exc:
            code = exc.exit_code
            _emit_error(exc.code, str(exc), code)
        except ValueError as exc:
            code = ConfigError.exit_code
            _emit_error(ConfigError.code, str(exc), code)
        if standalone_mode:
            sys.exit(code)
        return code


# ------------------------------------------------------------------ shared options

config_option = click.option(
    "--config",
    type=click.Path(dir_okay=False),
    callback=_load_config,
    is_eager=True,
    expose_value=False,
    help="JSON file with option values (flat, or keyed by command name).",
)


def output_options(f):
    opts = [
        click.option("--out", "out", default=DEFAULT_OUT, show_default=True, help="Output directory."),
        click.option("--formats", default="json", show_default=True, help="Comma list from json,obj,ply."),
        click.option("--mesh/--no-mesh", default=False, help="Write level-set meshes."),
        click.option("--level", type=float, default=DEFAULT_LEVEL, show_default=True, help="Level P."),
        click.option("--extent", type=float, default=4.0, show_default=True, help="Grid half extent."),
        click.option("--resolution", type=int, default=96, show_default=True, help="Grid points per axis."),
        click.option("--fit-grid/--no-fit-grid", default=False, help="Size the grid to contain the level sets."),
        click.option("--display-scale", type=float, default=1.0, show_default=True, help="Mesh vertex magnification."),
        click.option("--check-refinement/--no-check-refinement", default=False, help="Warn if the mesh is grid-limited."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def time_options(f):
    opts = [
        click.option("--Jt-min", "jt_min", default="0", show_default=True, help="First dimensionless time."),
        click.option("--Jt-max", "jt_max", default="0", show_default=True, help="Last dimensionless time."),
        click.option("--frames", type=int, default=1, show_default=True, help="Number of frames."),
        click.option("--pairs", default="1:2", show_default=True, help="1-based site pairs, e.g. 1:2,1:3."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _mesh_formats(formats: tuple[str, ...], mesh: bool) -> tuple[str, ...]:
    if mesh and not set(formats) - {"json"}:
        return tuple(formats) + ("obj",)
    return tuple(formats)


def _execute(command: str, params: dict, opts: dict, pairs, density=None, t_range=(0.0, 0.0), frames: int = 1) -> int:
    formats = parse_formats(opts["formats"])
    cfg = RunConfig(
        command=command,
        params=params,
        pairs=pairs,
        t_start=t_range[0],
        t_end=t_range[1],
        frames=frames,
        grid=GridSpec(half_extent=opts["extent"], resolution=opts["resolution"]),
        level=opts["level"],
        out_dir=opts["out"],
        formats=_mesh_formats(formats, opts["mesh"]),
        mesh=opts["mesh"],
        display_scale=opts["display_scale"],
        fit_grid=opts["fit_grid"],
        check_refinement=opts["check_refinement"],
        density=density,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = run(cfg)
    for w in caught:
        click.echo(json.dumps({"warning": w.category.__name__, "message": str(w.message)}), err=True)
    for path in result.files:
        click.echo(str(path))
    return 0


def _split_opts(kwargs: dict) -> dict:
    keys = ("out", "formats", "mesh", "level", "extent", "resolution", "fit_grid", "display_scale", "check_refinement")
    return {k: kwargs.pop(k) for k in keys}


def _time_args(kwargs: dict):
    t0, t1 = eval_number(kwargs.pop("jt_min")), eval_number(kwargs.pop("jt_max"))
    return (t0, t1), kwargs.pop("frames"), parse_pairs(kwargs.pop("pairs"))


# ------------------------------------------------------------------ commands


@click.group(cls=SpinGroup)
@click.version_option(version=__version__, message="%(version)s")
def cli():
    """Correlation-matrix visualizations of spin pairs."""


@cli.command()
@config_option
@click.option("--name", type=click.Choice(sorted(PRESETS)), default=None, help="Named two-spin state.")
@click.option("--density", type=click.Path(dir_okay=False), default=None, help="Density matrix JSON file.")
@output_options
def state(name, density, **kwargs):
    """Correlations of a preset or user-supplied two-spin state."""
    opts = _split_opts(kwargs)
    if (name is None) == (density is None):
        raise ConfigError("give exactly one of --name or --density")
    rho = sio.load_density(density) if density is not None else None
    params = {"name": name} if name is not None else {"density": str(density)}
    return _execute("state", params, opts, [(1, 2)], density=rho)


@cli.command()
@config_option
@click.option("--theta", default="pi/2", show_default=True, help="Initial polar angle (expression).")
@click.option("--J", "J", type=float, default=1.0, show_default=True, help="Ising coupling.")
@time_options
@output_options
def ising(theta, J, **kwargs):
    """Coherent Ising quench from a tilted product state."""
    opts = _split_opts(kwargs)
    t_range, frames, pairs = _time_args(kwargs)
    params = {"theta": eval_number(theta), "J": J}
    return _execute("ising", params, opts, pairs, t_range=t_range, frames=frames)


@cli.command("ising-lindblad")
@config_option
@click.option("--theta", default="pi/2", show_default=True, help="Initial polar angle (expression).")
@click.option("--J", "J", type=float, default=1.0, show_default=True, help="Ising coupling.")
@click.option("--gamma", default="0", show_default=True, help="Dephasing rate in units of J.")
@time_options
@output_options
def ising_lindblad(theta, J, gamma, **kwargs):
    """Ising quench with single-site spontaneous decay."""
    opts = _split_opts(kwargs)
    t_range, frames, pairs = _time_args(kwargs)
    params = {"theta": eval_number(theta), "J": J, "gamma": eval_number(gamma)}
    return _execute("ising-lindblad", params, opts, pairs, t_range=t_range, frames=frames)


@cli.command()
@config_option
@click.option("--hopping", type=float, default=1.0, show_default=True, help="Hopping amplitude.")
@click.option("--thetas", default=None, help="Periodic list of initial polar angles (default canted).")
@click.option("--bessel-cutoff", type=int, default=None, help="Largest propagator distance kept.")
@time_options
@output_options
def hubbard(hopping, thetas, bessel_cutoff, **kwargs):
    """Non-interacting Hubbard quench from a product spin state."""
    opts = _split_opts(kwargs)
    t_range, frames, pairs = _time_args(kwargs)
    params = {"hopping": hopping}
    if thetas is not None:
        params["initial_state"] = [eval_number(v) for v in thetas.split(",")]
    if bessel_cutoff is not None:
        params["bessel_cutoff"] = bessel_cutoff
    return _execute("hubbard", params, opts, pairs, t_range=t_range, frames=frames)


@cli.command()
@config_option
@click.option("--g", "g", type=float, default=0.5, show_default=True, help="Transverse field in units of J.")
@click.option("--T", "T", type=float, default=1.0, show_default=True, help="Temperature in units of J.")
@click.option("--n", "n", type=int, default=1, show_default=True, help="Pair separation.")
@click.option("--J", "J", type=float, default=1.0, show_default=True, help="Ising coupling.")
@click.option("--quad-points", type=int, default=1024, show_default=True, help="Momentum quadrature points.")
@click.option("--pairs", default=None, help="Explicit pairs (overrides --n).")
@output_options
def tfim(g, T, n, J, quad_points, pairs, **kwargs):
    """Thermal equilibrium of the transverse-field Ising chain."""
    opts = _split_opts(kwargs)
    pair_list = parse_pairs(pairs) if pairs else [(1, 1 + n)]
    params = {"g": g, "T": T, "J": J, "quad_points": quad_points}
    return _execute("tfim", params, opts, pair_list)


def _input_matrix(matrix, density) -> tuple[np.ndarray, dict]:
    if (matrix is None) == (density is None):
        raise ConfigError("give exactly one of --matrix or --density")
    if density is not None:
        obs = pair_observables_from_density(sio.load_density(density))
        return obs.c_connected, {"b_i": obs.b_i, "b_j": obs.b_j}
    return parse_matrix(matrix), {}


@cli.command()
@config_option
@click.option("--matrix", default=None, help="Connected correlation matrix, rows split by ';'.")
@click.option("--density", type=click.Path(dir_okay=False), default=None, help="Density matrix JSON file.")
@click.option("--tol", type=float, default=1e-8, show_default=True, help="Relative zero-eigenvalue tolerance.")
def classify(matrix, density, tol):
    """Print the shape class and irreducible parts of a correlation matrix."""
    c, extra = _input_matrix(matrix, density)
    sym, anti = split_symmetric_antisymmetric(c)
    shape = classify_shape(sym, tol=tol)
    parts = irreducible_decompose(c)
    doc = sio._clean(
        {
            "label": shape.label.value,
            "rank": shape.rank,
            "eigenvalues": shape.eigenvalues,
            "principal_axes": shape.principal_axes,
            "axis_eigenvalues": shape.axis_eigenvalues,
            "c0": parts.c0,
            "pseudovector": parts.c1,
            "a_lm": {f"{l},{m}": v for (l, m), v in parts.a_lm.items()},
            **extra,
        }
    )
    click.echo(json.dumps(doc, indent=2, sort_keys=True))
    return 0


@cli.command()
@config_option
@click.option("--matrix", default=None, help="Connected correlation matrix, rows split by ';'.")
@click.option("--density", type=click.Path(dir_okay=False), default=None, help="Density matrix JSON file.")
@output_options
def mesh(matrix, density, **kwargs):
    """Write the positive and negative level-set meshes of one matrix."""
    opts = _split_opts(kwargs)
    c, _ = _input_matrix(matrix, density)
    sym = 0.5 * (c + c.T)
    formats = [f for f in _mesh_formats(parse_formats(opts["formats"]), True) if f != "json"]
    grid = fit_grid(sym, opts["level"], opts["resolution"]) if opts["fit_grid"] else GridSpec(opts["extent"], opts["resolution"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        meshes = extract_level_sets(sym, opts["level"], grid, opts["check_refinement"])
    for w in caught:
        click.echo(json.dumps({"warning": w.category.__name__, "message": str(w.message)}), err=True)
    out = sio.ensure_dir(opts["out"])
    for m in meshes:
        scaled = m.scaled(opts["display_scale"]) if opts["display_scale"] != 1.0 else m
        for fmt in formats:
            path = out / sio.mesh_filename(0, (1, 2), m.sign, fmt)
            sio.write_mesh(scaled, fmt, path)
            click.echo(str(path))
    return 0


@cli.command()
@config_option
@click.option(
    "--model",
    type=click.Choice(["ising", "ising-lindblad", "hubbard"]),
    default="ising",
    show_default=True,
    help="Time-dependent model to animate.",
)
@click.option("--param", "param", multiple=True, help="Model parameter KEY=VALUE (repeatable).")
@time_options
@output_options
def animate(model, param, **kwargs):
    """Write one mesh pair per frame for a time sweep."""
    opts = _split_opts(kwargs)
    opts["mesh"] = True
    t_range, frames, pairs = _time_args(kwargs)
    return _execute(model, parse_params(param), opts, pairs, t_range=t_range, frames=frames)


@cli.command()
@config_option
@click.option("--only", default=None, help="Comma list of criterion numbers (default all).")
@click.option("--out", "out", default=None, help="Directory for per-criterion JSON artifacts.")
def verify(only, out):
    """Run the oracle comparisons and print a pass/fail table."""
    from .verify import CHECKS, run_suite

    selected = None
    if only:
        try:
            selected = [int(s) for s in only.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"--only expects integers, got {only!r}") from None
        unknown = sorted(set(selected) - set(CHECKS) - {9})
        if unknown:
            raise ConfigError(f"unknown criteria {unknown}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = run_suite(selected, out, echo=click.echo)
    passed = sum(r.passed for r in results)
    click.echo(f"{passed}/{len(results)} checks passed")
    return 0 if passed == len(results) else 1


def main() -> None:
    cli(prog_name="spincmv")


if __name__ == "__main__":
    main()
