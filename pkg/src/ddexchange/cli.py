"""Command-line front end emitting plot-ready CSV or JSON.

Subcommands: ``kmode``, ``map``, ``radial``, ``angular``, ``spectrum``.
Every file starts with a ``#`` header that echoes the run configuration as
JSON, so a run can be repeated from its own output::

    ddexchange map --model short_time --T 0.01 --U 0.05 \\
        --grid r:0..10:100 theta:0..pi:60 --output fig2.csv
    ddexchange --config configs/fig5_angular.json
"""

import argparse
import ast
import csv
import io
import json
import math
import operator
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .dynamics import MODELS, angular_profile, field_map, radial_profile, regime_flags
from .errors import DomainError, WeakCouplingWarning
from .kspace import MODE_NORM, SimParams, coupling_from_physical, mode_amplitudes
from .quadrature import QuadratureSpec
from .spectrum import DensityProfile, spectral_intensity

COMMANDS = ("kmode", "map", "radial", "angular", "spectrum")
OUTPUT_DIR_ENV = "DDEXCHANGE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3

COLUMNS = {
    "kmode": ["t", "k", "alpha", "re_psi", "im_psi", "re_phi", "im_phi", "norm"],
    "map": ["r", "theta", "re_psi", "im_psi", "population", "err_est", "valid"],
    "radial": ["r", "population", "err_est"],
    "angular": ["theta", "profile"],
    "spectrum": ["delta_omega", "intensity"],
}

# not echoed: they change where and how fast output is produced, not its content
_RUNTIME_FIELDS = ("output", "format", "jobs")


class ConfigError(DomainError):
    pass


@dataclass
class RunConfig:
    command: str
    U: float = None
    t: float = None
    T: float = None
    TU: float = None
    physical: list = None
    model: str = "full"
    grid: dict = field(default_factory=dict)
    theta: object = "pi/2"
    r_max: float = None
    dr: float = None
    samples: int = None
    range: str = None
    profile: dict = field(default_factory=lambda: {"shape": "sech2", "L": 4.0})
    quad: dict = field(default_factory=dict)
    output: str = None
    format: str = "csv"
    jobs: int = 1

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in data:
            raise ConfigError("config needs a 'command'")
        return cls(**data)

    def echo(self):
        """Configuration block written into output headers."""
        data = asdict(self)
        for name in _RUNTIME_FIELDS:
            data.pop(name)
        return data


# --- small parsers -------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_number(text):
    """Evaluate a numeric literal that may use ``pi``, e.g. ``"pi/2"``."""
    if isinstance(text, (int, float)):
        return float(text)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ConfigError(f"cannot parse number {text!r}")

    try:
        return ev(ast.parse(str(text).strip(), mode="eval"))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def parse_range(text):
    lo, sep, hi = str(text).partition("..")
    if not sep:
        raise ConfigError(f"range must look like lo..hi, got {text!r}")
    return parse_number(lo), parse_number(hi)


def parse_axis(text):
    """``"lo..hi:count"`` gives a linspace; a bare number gives one value."""
    text = str(text)
    if ".." not in text:
        return np.array([parse_number(text)])
    span, sep, count = text.rpartition(":")
    if not sep:
        raise ConfigError(f"axis {text!r} needs a point count, e.g. 0..10:100")
    lo, hi = parse_range(span)
    n = int(count)
    if n < 1:
        raise ConfigError("axis point count must be >= 1")
    return np.linspace(lo, hi, n)


def parse_grid_tokens(tokens):
    grid = {}
    for tok in tokens:
        name, sep, spec = tok.partition(":")
        if not sep:
            raise ConfigError(f"grid entry {tok!r} must look like name:lo..hi:count")
        grid[name] = spec
    return grid


def fmt(x):
    # adding 0.0 folds -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


# --- parameter assembly ----------------------------------------------------------

def _coupling(cfg):
    if cfg.physical is not None:
        d, n, omega = (float(v) for v in cfg.physical)
        return coupling_from_physical(d, n, omega)
    if cfg.U is None:
        raise ConfigError(f"{cfg.command} needs --U or --physical")
    return float(cfg.U)


def _sim_params(cfg):
    U = _coupling(cfg)
    given = [name for name in ("t", "T", "TU") if getattr(cfg, name) is not None]
    if len(given) != 1:
        raise ConfigError(f"{cfg.command} needs exactly one of --t, --T, --TU")
    if given[0] == "t":
        return SimParams(U=U, t=float(cfg.t))
    if given[0] == "T":
        return SimParams.from_T(U, float(cfg.T))
    return SimParams.from_TU(U, float(cfg.TU))


def _quad_spec(cfg):
    try:
        return QuadratureSpec(**cfg.quad)
    except TypeError as exc:
        raise ConfigError(f"bad quadrature settings: {exc}") from exc


def _profile(cfg):
    prof = dict(cfg.profile)
    samples = prof.pop("samples", None)
    if samples is not None:
        samples = (samples["r"], samples["n"]) if isinstance(samples, dict) else tuple(samples)
    return DensityProfile(L=float(prof.pop("L", 4.0)), shape=prof.pop("shape", "sech2"),
                          samples=samples)


# --- commands --------------------------------------------------------------------

@dataclass
class Table:
    columns: list
    rows: list
    header: dict
    partial: bool = False


def _kmode(cfg):
    params_U = _coupling(cfg)
    axes = {"t": "0", "k": "1", "alpha": "pi/2"}
    axes.update(cfg.grid)
    ts, ks, alphas = (parse_axis(axes[name]) for name in ("t", "k", "alpha"))
    rows = []
    for t in ts:
        params = SimParams(U=params_U, t=float(t))
        for k in ks:
            for a in alphas:
                st = mode_amplitudes(float(k), float(a), params)
                norm = st.norm / MODE_NORM**2
                rows.append([t, k, a, st.psi_k.real, st.psi_k.imag,
                             st.phi_k.real, st.phi_k.imag, norm])
    return Table(COLUMNS["kmode"], rows, {"derived": {"U": params_U}})


def _grid_points(cfg):
    grid = dict(cfg.grid)
    if {"r", "theta"} <= set(grid):
        r, th = np.meshgrid(parse_axis(grid["r"]), parse_axis(grid["theta"]), indexing="ij")
    elif {"z", "rho"} <= set(grid):
        z, rho = np.meshgrid(parse_axis(grid["z"]), parse_axis(grid["rho"]), indexing="ij")
        r, th = np.hypot(z, rho), np.arctan2(np.abs(rho), z)
    else:
        raise ConfigError("map grid needs r and theta (or z and rho) axes")
    if np.any(r < 0) or np.any(th < 0) or np.any(th > math.pi + 1e-12):
        raise ConfigError("grid must have r >= 0 and theta in [0, pi]")
    return r, np.clip(th, 0.0, math.pi)


def _derived(params):
    return {"U": params.U, "t": params.t, "T": params.T, "TU": params.TU_scale}


def _map(cfg):
    if cfg.model not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}")
    params = _sim_params(cfg)
    r, th = _grid_points(cfg)
    fm = field_map(r, th, params, _quad_spec(cfg), cfg.model, n_jobs=cfg.jobs)
    rows = [[a, b, p.real, p.imag, pop, e, int(v)] for a, b, p, pop, e, v in zip(
        fm.r.ravel(), fm.theta.ravel(), fm.psi.ravel(), fm.population.ravel(),
        fm.error.ravel(), fm.valid.ravel())]
    header = {"derived": _derived(params), "validity": fm.flags,
              "unconverged": int(np.sum(fm.status != "ok"))}
    return Table(COLUMNS["map"], rows, header, partial=not fm.converged)


def _radial(cfg):
    params = _sim_params(cfg)
    if cfg.r_max is None:
        raise ConfigError("radial needs --r-max")
    r_max = parse_number(cfg.r_max)
    dr = parse_number(cfg.dr) if cfg.dr is not None else r_max / 200.0
    theta = parse_number(cfg.theta)
    if not 0 <= theta <= math.pi:
        raise ConfigError("theta must lie in [0, pi]")
    fm = radial_profile(theta, r_max, params, _quad_spec(cfg), dr=dr, n_jobs=cfg.jobs)
    rows = [[a, pop, e] for a, pop, e in zip(fm.r, fm.population, fm.error)]
    header = {"derived": _derived(params), "validity": fm.flags,
              "unconverged": int(np.sum(fm.status != "ok"))}
    return Table(COLUMNS["radial"], rows, header, partial=not fm.converged)


def _angular(cfg):
    if cfg.T is not None:
        T = float(cfg.T)
    else:
        T = _sim_params(cfg).T
    n = int(cfg.samples or 181)
    theta = np.linspace(0.0, math.pi, n)
    values = angular_profile(theta, T)
    header = {"derived": {"T": T}, "validity": {"asymptotic": T >= 10.0}}
    return Table(COLUMNS["angular"], [[a, v] for a, v in zip(theta, np.atleast_1d(values))],
                 header)


def _spectrum(cfg):
    profile = _profile(cfg)
    lo, hi = parse_range(cfg.range or "-3..3")
    n = int(cfg.samples or 600)
    dw = np.linspace(lo, hi, n)
    values = spectral_intensity(dw, profile, zero_limit=True)
    header = {"derived": {"table_support": profile.support}}
    return Table(COLUMNS["spectrum"], [[a, v] for a, v in zip(dw, np.atleast_1d(values))],
                 header)


_HANDLERS = {"kmode": _kmode, "map": _map, "radial": _radial,
             "angular": _angular, "spectrum": _spectrum}


def compute(cfg):
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", WeakCouplingWarning)
        table = _HANDLERS[cfg.command](cfg)
    if any(issubclass(w.category, WeakCouplingWarning) for w in caught):
        table.header.setdefault("validity", {})["weak_coupling"] = False
    return table


# --- writers ---------------------------------------------------------------------

def render(cfg, table):
    header = {"version": __version__, "command": cfg.command, **table.header}
    if cfg.format == "json":
        body = {"header": {**header, "config": cfg.echo()},
                "columns": table.columns,
                "rows": [[float(v) for v in row] for row in table.rows]}
        return json.dumps(body, indent=1, sort_keys=True) + "\n"
    if cfg.format != "csv":
        raise ConfigError("format must be csv or json")
    buf = io.StringIO()
    buf.write(f"# ddexchange {__version__}\n")
    buf.write(f"# command: {cfg.command}\n")
    buf.write("# config: " + json.dumps(cfg.echo(), sort_keys=True) + "\n")
    for key in sorted(table.header):
        buf.write(f"# {key}: " + json.dumps(table.header[key], sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_header_config(text):
    """Recover the RunConfig echoed into a CSV or JSON output."""
    if text.lstrip().startswith("{"):
        return RunConfig.from_dict(json.loads(text)["header"]["config"])
    for line in text.splitlines():
        if line.startswith("# config: "):
            return RunConfig.from_dict(json.loads(line[len("# config: "):]))
    raise ConfigError("no config block found")


def _destination(cfg):
    if cfg.output:
        return cfg.output
    outdir = os.environ.get(OUTPUT_DIR_ENV)
    if outdir:
        return os.path.join(outdir, f"{cfg.command}.{cfg.format}")
    return None


def run(cfg):
    """Execute a configuration; returns the process exit status."""
    try:
        table = compute(cfg)
        text = render(cfg, table)
    except DomainError as exc:
        print(f"ddexchange: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        parent = os.path.dirname(dest)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    if table.partial:
        print("ddexchange: some points did not converge; rows are flagged", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


# --- argument parsing --------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="ddexchange", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON run configuration; flags override it")
    sub = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", dest="sub_config", help=argparse.SUPPRESS)
    common.add_argument("--output", "-o")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--jobs", type=int)

    coupling = argparse.ArgumentParser(add_help=False)
    coupling.add_argument("--U", type=float)
    coupling.add_argument("--physical", help="d,n,omega in Gaussian units; derives U")

    timing = argparse.ArgumentParser(add_help=False)
    timing.add_argument("--t", type=float, help="evolution time in 1/omega")
    timing.add_argument("--T", type=float, help="t*U^2")
    timing.add_argument("--TU", type=float, help="t*U^3")

    quad = argparse.ArgumentParser(add_help=False)
    quad.add_argument("--rel-tol", type=float)
    quad.add_argument("--abs-tol", type=float)
    quad.add_argument("--base-panels-theta", type=int)
    quad.add_argument("--base-panels-phi", type=int)
    quad.add_argument("--max-depth", type=int, dest="max_refinement_depth")
    quad.add_argument("--panel-cap", type=float, dest="oscillation_panel_cap")

    p = sub.add_parser("kmode", parents=[common, coupling],
                       help="exact single-mode amplitudes")
    p.add_argument("--grid", nargs="+", default=None,
                   help="axes t, k, alpha as name:lo..hi:count or name:value")

    p = sub.add_parser("map", parents=[common, coupling, timing, quad],
                       help="population map on an (r, theta) or (z, rho) grid")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--grid", nargs="+", default=None)

    p = sub.add_parser("radial", parents=[common, coupling, timing, quad],
                       help="population along a ray")
    p.add_argument("--theta")
    p.add_argument("--r-max", dest="r_max")
    p.add_argument("--dr")

    p = sub.add_parser("angular", parents=[common, coupling, timing],
                       help="asymptotic angular profile")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("spectrum", parents=[common], help="two-peak emission spectrum")
    p.add_argument("--L", type=float)
    p.add_argument("--shape", choices=("sech2", "gaussian"))
    p.add_argument("--range")
    p.add_argument("--samples", type=int)
    return parser


_QUAD_KEYS = ("rel_tol", "abs_tol", "base_panels_theta", "base_panels_phi",
              "max_refinement_depth", "oscillation_panel_cap")


def config_from_args(args):
    cfg_path = args.config or getattr(args, "sub_config", None)
    data = {}
    if cfg_path:
        with open(cfg_path) as fh:
            data = json.load(fh)
    if args.command:
        if data.get("command") not in (None, args.command):
            raise ConfigError("command on the command line differs from the config file")
        data["command"] = args.command
    ns = vars(args)
    for key in ("U", "t", "T", "TU", "model", "theta", "r_max", "dr", "samples",
                "range", "output", "format", "jobs"):
        if ns.get(key) is not None:
            data[key] = ns[key]
    if ns.get("physical") is not None:
        data["physical"] = [float(v) for v in ns["physical"].split(",")]
        data.pop("U", None)
    if ns.get("grid") is not None:
        data["grid"] = parse_grid_tokens(ns["grid"])
    quad = dict(data.get("quad", {}))
    for key in _QUAD_KEYS:
        if ns.get(key) is not None:
            quad[key] = ns[key]
    if quad:
        data["quad"] = quad
    if ns.get("L") is not None or ns.get("shape") is not None:
        prof = dict(data.get("profile", {"shape": "sech2", "L": 4.0}))
        if ns.get("L") is not None:
            prof["L"] = ns["L"]
        if ns.get("shape") is not None:
            prof["shape"] = ns["shape"]
        data["profile"] = prof
    return RunConfig.from_dict(data)


def _glue_negative_values(argv):
    """Let ``--range -3..3`` through; argparse would read ``-3..3`` as a flag."""
    out = []
    for tok in argv:
        if out and out[-1] == "--range" and tok.startswith("-"):
            out[-1] = f"--range={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    if not args.command and not args.config:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = config_from_args(args)
    except (DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"ddexchange: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
