"""Command-line entry point.

    twolayer conserved gen --family poly --n 6 --vars xs
    twolayer conserved verify --index 3 --r 0.05
    twolayer deform --index 5
    twolayer deform involution --max 16
    twolayer hyper --r 0.5 [--appendix-b]
    twolayer hyper simple-wave --start 0.1,0.2 --r 0.3
    twolayer hodograph run --F-index 3 --r 0.05 --mode sigma-zero --t 0:2:0.5
    twolayer hodograph curves --F-index 3 --r 0.05 --kind time --levels -1:1:0.25
    twolayer sim run --model o1 --r 0.05 --ic hodograph:index=3 --T 2 --nx 453

Global flags: --out DIR, --format {csv,json}, --seed N, --config FILE.
A config file (TOML or JSON) holds the same options by long name; flags
given on the command line win.  Errors are reported as one JSON object on
stderr with a nonzero exit status.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

EXIT_USAGE = 2
EXIT_FAILURE = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# output helpers

def _num(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_num) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class Output:
    """Collects named artifacts; writes them to --out or prints them."""

    def __init__(self, out_dir: str | None, fmt: str):
        self.dir = Path(out_dir) if out_dir else None
        self.fmt = fmt
        self.written: list[str] = []

    def emit(self, name: str, text: str):
        if self.dir is None:
            sys.stdout.write(text)
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / name
        path.write_text(text)
        self.written.append(str(path))

    def table(self, stem: str, header, rows, extra: dict | None = None):
        if self.fmt == "json":
            body = {"columns": list(header), "rows": [[_num(v) for v in r] for r in rows]}
            body.update(extra or {})
            self.emit(f"{stem}.json", _dumps(body))
        else:
            self.emit(f"{stem}.csv", _csv_text(header, rows))

    def finish(self):
        if self.dir is not None:
            sys.stdout.write(_dumps({"written": self.written}))


def _poly_json(p):
    from .conserved import LogDensity
    from .ratpoly import BiPoly, JetExpr, RadicalPoly

    if isinstance(p, BiPoly):
        return {"type": "polynomial", "names": list(p.names), "terms": p.to_json(), "text": repr(p)}
    if isinstance(p, RadicalPoly):
        return {"type": "radical", **p.to_json(), "text": repr(p)}
    if isinstance(p, LogDensity):
        return {"type": "log", "poly": _poly_json(p.poly), "log_coeff": _poly_json(p.log_coeff),
                "log_arg": _poly_json(p.log_arg)}
    if isinstance(p, JetExpr):
        return {"type": "jet", "terms": p.to_json(), "text": repr(p)}
    raise TypeError(type(p).__name__)


def _range(spec: str) -> list[float]:
    """'a:b:h' (inclusive), or a comma list."""
    if ":" in spec:
        a, b, h = (float(v) for v in spec.split(":"))
        if h <= 0 or b < a:
            raise UsageError(f"bad range {spec!r}")
        n = int(round((b - a) / h))
        return [a + k * h for k in range(n + 1)]
    return [float(v) for v in spec.split(",") if v]


def _pair(spec: str) -> tuple[float, float]:
    parts = [float(v) for v in spec.split(",")]
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated numbers, got {spec!r}")
    return parts[0], parts[1]


def _check_r(r: float):
    if not 0 <= r < 1:
        raise UsageError(f"--r must lie in [0, 1), got {r}")


# subcommands

FAMILIES = {"poly": "polynomial", "polynomial": "polynomial", "algebraic": "algebraic",
            "toda": "toda"}


def cmd_conserved_gen(a, out: Output):
    from . import conserved as C

    fam = FAMILIES[a.family]
    if a.n < 1:
        raise UsageError("--n must be >= 1")
    gen = {"polynomial": C.generate_polynomial_family, "algebraic": C.generate_algebraic_family,
           "toda": C.generate_toda_family}[fam]
    dens = gen(a.n, a.vars)
    body = {"family": fam, "variables": C.VAR_ALIASES[a.vars],
            "densities": [{"index": d.index, "density": _poly_json(d.density)} for d in dens]}
    out.emit(f"conserved_{fam}.json", _dumps(body))


def cmd_conserved_verify(a, out: Output):
    from .conserved import is_conserved
    from .deformation import deformed_pair
    from .models import FIRST, ModelParams, hamiltonian

    _check_r(a.r)
    rows = []
    for j in range(1, a.n + 1):
        F0, F1 = deformed_pair(j)
        ok0, _ = is_conserved(F0, hamiltonian(ModelParams(0, order="o0")))
        ok1, _ = is_conserved([F0, F1], hamiltonian(ModelParams(Fraction(a.r).limit_denominator(10 ** 9),
                                                                order=FIRST)), order="o1")
        # pointwise check of the first-order identity at seeded random points
        rng = np.random.default_rng(a.seed)
        pts = rng.uniform(-0.9, 0.9, size=(a.points, 2))
        r = float(a.r)
        F = F0 + F1 * Fraction(a.r).limit_denominator(10 ** 9)
        H = hamiltonian(ModelParams(r, order=FIRST))
        Fxx, Fss = F.diff("xi", 2).compile(), F.diff("sigma", 2).compile()
        d = H.derivatives(pts[:, 0], pts[:, 1])
        res = Fxx(pts[:, 0], pts[:, 1]) * d["ss"] - d["xx"] * Fss(pts[:, 0], pts[:, 1])
        rows.append([j, int(ok0), int(ok1), float(np.max(np.abs(res)))])
    out.table("conserved_verify", ["index", "boussinesq_exact", "first_order_exact",
                                   "max_pointwise_residual"], rows,
              {"r": a.r, "seed": a.seed, "points": a.points})


def cmd_deform(a, out: Output):
    from .deformation import deformed_pair

    if a.index < 1:
        raise UsageError("--index must be >= 1")
    F0, F1 = deformed_pair(a.index)
    out.emit(f"deform_{a.index}.json", _dumps({"index": a.index, "F0": _poly_json(F0),
                                               "F1": _poly_json(F1)}))


def cmd_deform_involution(a, out: Output):
    from .deformation import involution_table

    if a.max < 2:
        raise UsageError("--max must be >= 2")
    table = involution_table(a.max)
    rows = [[j, k, int(ok)] for (j, k), ok in sorted(table.items())]
    out.table("involution", ["j", "k", "in_involution"], rows,
              {"all": all(table.values()), "max_index": a.max})


def cmd_hyper(a, out: Output):
    from .models import BOUSSINESQ, FIXED_G, ModelParams
    from .spectral import boundary_samples, hyperbolic_boundary

    _check_r(a.r)
    params = ModelParams(a.r, FIXED_G if a.appendix_b else BOUSSINESQ)
    rep = hyperbolic_boundary(params)
    xi, sb = boundary_samples(params, a.samples)
    out.table("hyperbolicity", ["xi", "sigma_b"], list(zip(xi, sb)),
              {"area": rep.area, "area_quadrature": rep.area_quadrature, "units": rep.units,
               "r": a.r})
    if a.format == "csv":
        out.emit("hyperbolicity_area.json", _dumps({"r": a.r, "area": rep.area,
                                                     "area_quadrature": rep.area_quadrature,
                                                     "units": rep.units}))


def cmd_simple_wave(a, out: Output):
    from .models import BOUSSINESQ, FIXED_G, ModelParams
    from .spectral import simple_wave_curve

    _check_r(a.r)
    params = ModelParams(a.r, FIXED_G if a.appendix_b else BOUSSINESQ)
    sw = simple_wave_curve(_pair(a.start), params, direction=a.direction,
                           xi_direction=a.xi_direction)
    out.table("simple_wave", ["xi", "sigma"], list(zip(sw.xi, sw.sigma)),
              {"termination": sw.termination, "end_slope": repr(sw.end_slope)})


def cmd_hodograph_run(a, out: Output):
    from .hodograph import HodographProblem, evolve, to_layer_variables

    _check_r(a.r)
    times = _range(a.t)
    p = HodographProblem.from_index(a.F_index, a.r, order=a.model, mode=a.mode,
                                    method=a.method, domain=_pair(a.domain), nx=a.nx,
                                    times=tuple(times))
    sol = evolve(p)
    rows = []
    for k, t in enumerate(sol.times):
        ls = to_layer_variables((np.nan_to_num(sol.xi[k]), sol.sigma[k]), a.r)
        for i, x in enumerate(sol.x):
            if sol.valid[k, i]:
                rows.append([t, x, sol.xi[k, i], sol.sigma[k, i], ls.w[i], ls.u1[i], ls.u2[i],
                             sol.residual[k, i]])
    out.table("hodograph", ["t", "x", "xi", "sigma", "w", "u1", "u2", "residual"], rows,
              {"exists_everywhere": sol.exists_everywhere()})
    out.emit("hodograph_report.json", _dumps({
        "r": a.r, "F_index": a.F_index, "mode": p.mode, "method": p.method,
        "exists_everywhere": sol.exists_everywhere(), "max_residual": sol.max_residual(),
        "breakdown": [[x, t] for x, t in zip(sol.x, sol.breakdown_time) if np.isfinite(t)]}))


def cmd_hodograph_curves(a, out: Output):
    from .deformation import deformed_pair
    from .hodograph import SPACE_FAMILY, TIME_FAMILY, hodograph_curves
    from .models import ModelParams, hamiltonian

    _check_r(a.r)
    F0, F1 = deformed_pair(a.F_index)
    F = F0 + F1 * Fraction(a.r).limit_denominator(10 ** 9)
    H = hamiltonian(ModelParams(a.r, order=a.model))
    kind = TIME_FAMILY if a.kind == "time" else SPACE_FAMILY
    fam = hodograph_curves(F, H, kind)
    rows = []
    for level in _range(a.levels):
        for xi, s in fam.level_set(level, n_xi=a.samples):
            rows.append([level, xi, s])
    out.table(f"curves_{a.kind}", ["level", "xi", "sigma"], rows)


def _load_ic(spec: str, a):
    from .simulator import CONSTANT, PERIODIC, Boundary, GridState

    path = Path(spec)
    if not path.exists():
        raise UsageError(f"initial-condition file {spec!r} not found")
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("x", "xi", "sigma"):
        if col not in data.dtype.names:
            raise UsageError(f"initial-condition file needs a {col!r} column")
    bc = Boundary(PERIODIC if a.bc == "periodic" else CONSTANT)
    return GridState(data["x"], data["xi"], data["sigma"], boundary=bc)


def _hodograph_ic(spec: str, a):
    from .crosscheck import DEFAULT_DOMAIN, hodograph_left_boundary
    from .hodograph import HodographProblem, evolve
    from .simulator import DIRICHLET, Boundary, GridState

    opts = dict(kv.split("=", 1) for kv in spec.split(",") if kv)
    index = int(opts.get("index", 3))
    mode = opts.get("mode", "sigma_zero")
    domain = _pair(opts["domain"].replace(";", ",")) if "domain" in opts else DEFAULT_DOMAIN
    kw = dict(index=index, r=a.r, order=a.model, mode=mode)
    p = HodographProblem.from_index(**kw, domain=domain, nx=a.nx, times=(0.0,))
    h = evolve(p)
    dx = float(h.x[1] - h.x[0])
    bc = Boundary(DIRICHLET, hodograph_left_boundary(kw, h.x[0], dx, a.T, p.H))
    return GridState(h.x, h.xi[0], h.sigma[0], boundary=bc), index


def cmd_sim_run(a, out: Output):
    from .deformation import deformed_pair
    from .models import ModelParams, hamiltonian
    from .simulator import monitor, run

    _check_r(a.r)
    H = hamiltonian(ModelParams(a.r, order=a.model))
    if a.ic.startswith("hodograph:") or a.ic == "hodograph":
        state, _ = _hodograph_ic(a.ic.partition(":")[2], a)
    else:
        state = _load_ic(a.ic, a)
    snaps = _range(a.snapshots) if a.snapshots else [a.T]
    res = run(state, H, a.T, scheme=a.scheme, cfl=a.cfl, viscosity=a.viscosity,
              store=[t for t in snaps if t > state.t])
    for st in res.states:
        out.table(f"snapshot_t{st.t:.6f}", ["x", "xi", "sigma"],
                  list(zip(st.x, st.xi, st.sigma)), {"t": st.t})
    rq = Fraction(a.r).limit_denominator(10 ** 9)
    inv = {"casimir_xi": lambda xi, s: xi, "casimir_sigma": lambda xi, s: s,
           "hamiltonian": H.exact_form}
    for j in a.invariants:
        F0, F1 = deformed_pair(j)
        inv[f"F0_{j}"] = F0
        inv[f"F0_{j}+rF1_{j}"] = F0 + F1 * rq
    rep = monitor(res.states, inv)
    out.emit("drift_report.json", _dumps({
        "times": list(rep.times), "baselines": rep.baselines,
        "max_drift": {k: rep.max_drift(k) for k in rep.values},
        "steps": res.steps, "model": a.model, "r": a.r, "scheme": a.scheme}))


# parser

GLOBAL_OPTIONS = ("out", "format", "seed")


def _global_flags(parser, defaults: bool):
    # subcommands accept the global flags too, but must not reset values given earlier
    kw = (lambda v: {"default": v}) if defaults else (lambda v: {"default": argparse.SUPPRESS})
    parser.add_argument("--out", help="directory for artifacts (default: stdout)", **kw(None))
    parser.add_argument("--format", choices=("csv", "json"), **kw("csv"))
    parser.add_argument("--seed", type=int, **kw(0))
    parser.add_argument("--config", help="TOML or JSON file with option defaults", **kw(None))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _global_flags(common, defaults=False)

    p = _Parser(prog="twolayer", description="Two-layer long-wave model toolkit")
    _global_flags(p, defaults=True)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cons = sub.add_parser("conserved", parents=[common])
    csub = cons.add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = csub.add_parser("gen", parents=[common])
    g.add_argument("--family", choices=sorted(FAMILIES), default="poly")
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--vars", choices=("xs", "xisigma", "uv"), default="xs")
    g.set_defaults(func=cmd_conserved_gen)
    v = csub.add_parser("verify", parents=[common])
    v.add_argument("--n", type=int, default=6)
    v.add_argument("--r", type=float, default=0.05)
    v.add_argument("--points", type=int, default=100)
    v.set_defaults(func=cmd_conserved_verify)

    d = sub.add_parser("deform", parents=[common])
    d.add_argument("--index", type=int, default=3)
    d.set_defaults(func=cmd_deform)
    dsub = d.add_subparsers(dest="action", parser_class=_Parser)
    inv = dsub.add_parser("involution", parents=[common])
    inv.add_argument("--max", type=int, default=16)
    inv.set_defaults(func=cmd_deform_involution)

    h = sub.add_parser("hyper", parents=[common])
    h.add_argument("--r", type=float, default=0.0)
    h.add_argument("--appendix-b", action="store_true", help="fixed-g scaling")
    h.add_argument("--samples", type=int, default=201)
    h.set_defaults(func=cmd_hyper)
    hsub = h.add_subparsers(dest="action", parser_class=_Parser)
    sw = hsub.add_parser("simple-wave", parents=[common])
    sw.add_argument("--start", required=True, help="xi,sigma")
    sw.add_argument("--r", type=float, default=0.0)
    sw.add_argument("--appendix-b", action="store_true")
    sw.add_argument("--direction", type=int, choices=(1, -1), default=1)
    sw.add_argument("--xi-direction", type=int, choices=(1, -1), default=1)
    sw.set_defaults(func=cmd_simple_wave)

    ho = sub.add_parser("hodograph", parents=[common])
    hosub = ho.add_subparsers(dest="action", required=True, parser_class=_Parser)
    hr = hosub.add_parser("run", parents=[common])
    hr.add_argument("--F-index", dest="F_index", type=int, default=3)
    hr.add_argument("--r", type=float, default=0.05)
    hr.add_argument("--mode", choices=("sigma-zero", "xi-constant"), default="sigma-zero")
    hr.add_argument("--method", choices=("newton", "perturbative"), default="newton")
    hr.add_argument("--model", choices=("o0", "o1", "full"), default="o1")
    hr.add_argument("--t", default="0:2:0.5")
    hr.add_argument("--domain", default="-0.5,0.5")
    hr.add_argument("--nx", type=int, default=101)
    hr.set_defaults(func=cmd_hodograph_run)
    hc = hosub.add_parser("curves", parents=[common])
    hc.add_argument("--F-index", dest="F_index", type=int, default=3)
    hc.add_argument("--r", type=float, default=0.05)
    hc.add_argument("--model", choices=("o0", "o1", "full"), default="o1")
    hc.add_argument("--kind", choices=("time", "space"), default="time")
    hc.add_argument("--levels", default="-1:1:0.25")
    hc.add_argument("--samples", type=int, default=101)
    hc.set_defaults(func=cmd_hodograph_curves)

    s = sub.add_parser("sim", parents=[common])
    ssub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sr = ssub.add_parser("run", parents=[common])
    sr.add_argument("--model", choices=("o0", "o1", "full"), default="o1")
    sr.add_argument("--r", type=float, default=0.05)
    sr.add_argument("--ic", default="hodograph:index=3",
                    help="CSV file with x,xi,sigma columns or hodograph:index=J[,mode=M]")
    sr.add_argument("--bc", choices=("periodic", "constant"), default="periodic")
    sr.add_argument("--T", type=float, default=2.0)
    sr.add_argument("--nx", type=int, default=453)
    sr.add_argument("--scheme", choices=("central_rk4", "lax_friedrichs"), default="central_rk4")
    sr.add_argument("--cfl", type=float, default=0.4)
    sr.add_argument("--viscosity", type=float, default=0.0)
    sr.add_argument("--snapshots", default=None, help="output times, e.g. 0:2:0.5")
    sr.add_argument("--invariants", type=lambda s: [int(v) for v in s.split(",")],
                    default=[3, 4])
    sr.set_defaults(func=cmd_sim_run)
    return p


def _load_config(path: str) -> dict:
    if not Path(path).exists():
        raise UsageError(f"config file {path!r} not found")
    text = Path(path).read_bytes()
    try:
        if path.endswith(".json"):
            return json.loads(text)
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode())
    except ValueError as e:
        raise UsageError(f"cannot read config {path!r}: {e}") from None


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action
    return None


def _apply_config(parser, argv: list[str]) -> list[str]:
    """Strip --config from argv and install the file's options as parser defaults.

    Options given on the command line override the file.  A `command` key
    supplies the subcommand words when argv has none.
    """
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file name")
    cfg = dict(_load_config(argv[i + 1]))
    argv = argv[:i] + argv[i + 2:]
    command = cfg.pop("command", [])
    command = command.split() if isinstance(command, str) else list(command)

    chain, leaf = [], parser
    for tok in argv:
        sub = _subparsers(leaf)
        if sub is not None and tok in sub.choices:
            chain.append(tok)
            leaf = sub.choices[tok]
    if not chain:
        for tok in command:
            sub = _subparsers(leaf)
            if sub is None or tok not in sub.choices:
                raise UsageError(f"unknown command {' '.join(command)!r} in config")
            leaf = sub.choices[tok]
        argv = command + argv
    elif command and chain[:len(command)] != command[:len(chain)]:
        raise UsageError("config command does not match the command line")

    for key, val in cfg.items():
        dest = key.replace("-", "_")
        target = parser if dest in GLOBAL_OPTIONS else leaf
        action = next((a for a in target._actions if a.dest == dest), None)
        if action is None:
            raise UsageError(f"unknown config option {key!r}")
        if isinstance(val, list):
            val = ",".join(str(v) for v in val)
        if action.type is not None and not isinstance(val, bool):
            val = action.type(str(val))
        if action.choices is not None and val not in action.choices:
            raise UsageError(f"config option {key!r}: invalid choice {val!r}")
        target.set_defaults(**{dest: val})
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        args = parser.parse_args(_apply_config(parser, argv))
        out = Output(args.out, args.format)
        args.func(args, out)
        out.finish()
        return 0
    except UsageError as e:
        _report("usage", str(e))
        return EXIT_USAGE
    except Exception as e:  # module errors propagate with their type as context
        _report(type(e).__name__, str(e))
        return EXIT_FAILURE


def _report(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())
