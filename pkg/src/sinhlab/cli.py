"""Command-line front end: ``sinh-lab <command> [options]``.

Grids go out as CSV whose first line is ``# {json header}``; scalar bundles
go out as JSON.  Files are written atomically (temporary file, then
rename), so a failed run leaves nothing behind.  Exit status is 0 on
success, 1 on a computational failure and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, SinhLabError

COMMANDS = ("eqmeasure", "curve", "polys", "compare", "kernel", "dmpk", "parametrix-check")
PRECISION_ENV = "SINH_LAB_PRECISION"
MIN_PRECISION_BITS = 64
REGION_NAMES = ("outer", "bulk", "airy", "bessel", "h")

# binary64 tolerances of the double-precision modules, recorded in every header
DOUBLE_TOLERANCES = {"rel_tol": 1e-12, "abs_tol": 3e-14}


@dataclass
class RunConfig:
    command: str
    potential_spec: str = "linear:M=1"
    alpha: float = 0.0
    precision_bits: Optional[int] = None  # None: the exact engine picks its own start
    output_path: Optional[str] = None
    format: str = "csv"
    emit_gnuplot: bool = False
    options: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, not {self.format!r}")
        if self.precision_bits is not None and self.precision_bits < MIN_PRECISION_BITS:
            raise ConfigError(f"precision_bits must be at least {MIN_PRECISION_BITS}")
        if not self.alpha > -1:
            raise ConfigError("alpha must exceed -1")
        if self.emit_gnuplot and not self.output_path:
            raise ConfigError("--emit-gnuplot needs --output")


@dataclass
class Artifact:
    """What a command produced, before serialization."""

    header: Dict[str, object]
    columns: List[str] = field(default_factory=list)
    rows: List[Sequence] = field(default_factory=list)
    payload: Optional[Dict[str, object]] = None  # JSON-only bundles
    table: Optional[str] = None  # human-readable text for the terminal
    status: int = 0


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def render(art: Artifact, fmt: str) -> str:
    header = json.dumps(_jsonable(art.header), sort_keys=True)
    if art.payload is not None or fmt == "json":
        body = dict(art.payload or {})
        if art.columns:
            body["columns"] = art.columns
            body["rows"] = [[float(v) if not isinstance(v, str) else v for v in row]
                            for row in art.rows]
        return json.dumps(_jsonable({"header": art.header, **body}), indent=1, sort_keys=True) + "\n"
    lines = ["# " + header, ",".join(art.columns)]
    lines.extend(",".join(_cell(v) for v in row) for row in art.rows)
    return "\n".join(lines) + "\n"


def gnuplot_script(art: Artifact, data_path: str) -> str:
    """A companion script; the CSV's ``#`` header line is a gnuplot comment."""
    cols = art.columns
    title = art.header.get("command", "")
    lines = ["set datafile separator ','", "set key autotitle columnhead", f"set title '{title}'"]
    if "rel_error" in cols:
        x, y = cols.index("n") + 1, cols.index("rel_error") + 1
        lines += ["set logscale xy", "set xlabel 'n'", "set ylabel 'relative error'",
                  f"plot '{data_path}' using {x}:{y} with points pointtype 7"]
        return "\n".join(lines) + "\n"
    numeric = [i for i, v in enumerate(art.rows[0]) if not isinstance(v, str)] if art.rows else []
    if len(numeric) < 2:
        return f"# {data_path} has no plottable columns\n"
    first = numeric[0]
    lines.append(f"set xlabel '{cols[first]}'")
    plots = [f"'{data_path}' using {first + 1}:{i + 1} with lines" for i in numeric[1:]]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".sinhlab-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _header(cfg: RunConfig, formulas: List[str], parameters: Dict[str, object],
            results: Dict[str, object], precision: Optional[Dict[str, object]] = None,
            tolerances: Optional[Dict[str, object]] = None) -> Dict[str, object]:
    return {
        "command": cfg.command,
        "formulas": formulas,
        "parameters": parameters,
        "precision": precision or {"arithmetic": "binary64", "mantissa_bits": 53},
        "tolerances": tolerances or dict(DOUBLE_TOLERANCES),
        "results": results,
        "sinhlab": __version__,
    }


def _cheb_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n Chebyshev points of the first kind on (lo, hi), ascending."""
    k = np.arange(n)
    return lo + (hi - lo) * 0.5 * (1.0 - np.cos(math.pi * (k + 0.5) / n))


def _measure(spec: str):
    from .equilibrium import Potential, build_measure

    return build_measure(Potential.from_spec(spec))


def cmd_curve(cfg: RunConfig) -> Artifact:
    from .conformal import build_curve

    x = float(cfg.options["x"])
    if not x > 0:
        raise ConfigError("--x must be positive")
    curve = build_curve(x, n_nodes=int(cfg.options.get("nodes", 512)))
    nodes = np.asarray(curve.gamma1.nodes)
    jvals = np.real(curve.J(nodes))
    rows = [(i, s.real, s.imag, j) for i, (s, j) in enumerate(zip(nodes, jvals))]
    results = {"x": x, "s1": curve.s1, "s2": curve.s2, "b": curve.b, "vstar": curve.vstar,
               "e1": curve.e1, "d1": curve.d1}
    header = _header(cfg, ["s2 = 1 + 2/x", "b = J_x(s2)^2/4", "gamma_1 upper arc", "e1", "d1"],
                     {"x": x, "nodes": len(nodes)}, results)
    return Artifact(header, ["index", "re_s", "im_s", "J"], rows)


def cmd_eqmeasure(cfg: RunConfig) -> Artifact:
    meas = _measure(cfg.potential_spec)
    grid = _cheb_grid(0.0, meas.b, int(cfg.options.get("grid", 200)))
    psi = np.asarray(meas.psi(grid))
    results = {"c": meas.c, "b": meas.b, "psi0": meas.psi0, "psib": meas.psib, "ell": meas.ell}
    header = _header(cfg, ["F(c) = 2", "b = b(c)", "psi density", "ell: phi(b) = 0"],
                     {"potential": cfg.potential_spec, "grid": len(grid)}, results)
    return Artifact(header, ["x", "psi"], list(zip(grid, psi)))


def cmd_dmpk(cfg: RunConfig) -> Artifact:
    from .equilibrium import b_linear_closed, dmpk_density, dmpk_measure, ohm_integral

    M = float(cfg.options["M"])
    if not M > 0:
        raise ConfigError("--M must be positive")
    meas = dmpk_measure(M)
    grid = _cheb_grid(0.0, math.sqrt(meas.b), int(cfg.options.get("grid", 200)))
    rho = np.asarray(dmpk_density(meas, grid))
    results = {"M": M, "c": meas.c, "b": meas.b, "b_closed_form": b_linear_closed(M),
               "ohm_integral": ohm_integral(meas)}
    header = _header(cfg, ["rho(x; M) = 2 x psi(x^2)", "c = 2M", "b closed form",
                           "int sech^2(sqrt l) psi(l) dl"],
                     {"M": M, "grid": len(grid)}, results)
    return Artifact(header, ["x", "rho"], list(zip(grid, rho)))


def _weight(cfg: RunConfig, n: int):
    from .equilibrium import Potential
    from .exact import WeightSpec

    factor = str(cfg.options.get("weight_factor", "dmpk"))
    return WeightSpec(cfg.alpha, factor, Potential.from_spec(cfg.potential_spec), n)


def _exact_precision(sys_list) -> Dict[str, object]:
    return {"arithmetic": "mpfr", "mantissa_bits": max(s.precision_used for s in sys_list),
            "max_residual": max(s.max_residual for s in sys_list),
            "pivot_agreement": max(s.pivot_agreement for s in sys_list)}


def _exact_tolerances(sys_list) -> Dict[str, object]:
    bits = max(s.precision_used for s in sys_list)
    return {"residual_bound": 10.0 ** (-bits * math.log10(2.0) / 2.0),
            "quadrature_tol": 2.0 ** (-bits / 2.0)}


def cmd_polys(cfg: RunConfig) -> Artifact:
    from .exact import biorthogonalize

    n = int(cfg.options["n"])
    deg = int(cfg.options["deg"])
    if deg < 0:
        raise ConfigError("--deg must be non-negative")
    w = _weight(cfg, n)
    sys_ = biorthogonalize(w, deg, bits=cfg.precision_bits)
    with sys_.context():
        p = [[float(c) for c in row] for row in sys_.p_coeffs]
        q = [[float(c) for c in row] for row in sys_.q_coeffs]
    h = [sys_.h_float(j) for j in range(deg + 1)]
    log_h = [sys_.log_h(j) for j in range(deg + 1)]
    header = _header(cfg, ["bimoments int x^i f(x)^j W(x) dx", "monic p_j, q_j", "h_j pairing"],
                     {"potential": cfg.potential_spec, "alpha": cfg.alpha, "n": n, "deg": deg,
                      "weight_factor": w.h_kind}, {"min_h": min(h)},
                     _exact_precision([sys_]), _exact_tolerances([sys_]))
    payload = {"p_coeffs": p, "q_coeffs": q, "h": h, "log_h": log_h,
               "coefficient_order": "constant term first; q_j in the variable w = f(x)"}
    return Artifact(header, payload=payload)


def _parse_list(text: str, conv=float) -> List:
    try:
        return [conv(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def default_points(b: float) -> Dict[str, list]:
    return {"outer": [2.0 * b, b * (1 + 1j)], "bulk": [0.5 * b], "airy": [-1.0, 0.0, 1.0],
            "bessel": [0.5, 1.0, 2.0], "h": [None]}


def cmd_compare(cfg: RunConfig) -> Artifact:
    from .exact import compare_report
    from .parametrix import build_bundle

    n_list = _parse_list(cfg.options.get("n", "10,20,40"), int)
    if not n_list or min(n_list) < 1:
        raise ConfigError("--n needs positive integers")
    k = int(cfg.options.get("k", 0))
    regions = [r.strip() for r in str(cfg.options.get("regions", ",".join(REGION_NAMES))).split(",")
               if r.strip()]
    bad = [r for r in regions if r not in REGION_NAMES]
    if bad:
        raise ConfigError(f"unknown regions {bad}; choose from {REGION_NAMES}")
    w = _weight(cfg, n_list[0])
    meas = _measure(cfg.potential_spec)
    bundle = build_bundle(meas, cfg.alpha, k, factor=w.h_kind)
    pts = {r: v for r, v in default_points(meas.b).items() if r in regions}
    systems: Dict[int, object] = {}
    report = compare_report(w, meas, bundle, n_list, k, pts, systems)
    rows = []
    for r in report.rows:
        pt = 0j if r.point is None else complex(r.point)
        decay = report.decay[(r.region, r.quantity, r.point, r.k)]
        rows.append((r.region, r.quantity, pt.real, pt.imag, r.n, r.k, r.rel_error, decay))
    header = _header(cfg, ["outer: G_k(I_1(z)) e^{n g(z)}", "bulk cosine form",
                           "Airy scaled limit", "Bessel scaled limit", "h norm constant"],
                     {"potential": cfg.potential_spec, "alpha": cfg.alpha, "n": n_list, "k": k,
                      "regions": regions, "weight_factor": w.h_kind,
                      "point_convention": "z for outer/bulk, local t for airy/bessel"},
                     {"c": meas.c, "b": meas.b}, _exact_precision(systems.values()),
                     _exact_tolerances(systems.values()))
    return Artifact(header, ["region", "quantity", "point_re", "point_im", "n", "k",
                             "rel_error", "decay_exponent"], rows)


def cmd_kernel(cfg: RunConfig) -> Artifact:
    from .exact import biorthogonalize, kernel_K, kernel_trace

    n = int(cfg.options["n"])
    if n < 1:
        raise ConfigError("--n must be positive")
    meas = _measure(cfg.potential_spec)
    w = _weight(cfg, n)
    sys_ = biorthogonalize(w, n - 1 if n > 1 else 0, bits=cfg.precision_bits)
    top = float(cfg.options.get("xmax") or 1.25 * meas.b)
    count = int(cfg.options.get("grid", 200))
    grid = top * (np.arange(1, count + 1) / count)
    with sys_.context():
        diag = [float(kernel_K(sys_, x, x, n)) for x in grid]
    trace = kernel_trace(sys_, n)
    header = _header(cfg, ["K_n(x,y) = sqrt(W(x)W(y)) sum p_j(x) q_j(f(y)) / h_j",
                           "int K_n(x,x) dx = n"],
                     {"potential": cfg.potential_spec, "alpha": cfg.alpha, "n": n,
                      "grid": count, "xmax": top, "weight_factor": w.h_kind},
                     {"trace": trace, "b": meas.b}, _exact_precision([sys_]),
                     _exact_tolerances([sys_]))
    return Artifact(header, ["x", "K_diag"], list(zip(grid, diag)))


def cmd_parametrix_check(cfg: RunConfig) -> Artifact:
    from .equilibrium import dmpk_measure
    from .parametrix import build_bundle, identity_checks
    from .specialfn import model_checks

    M = float(cfg.options.get("M", 1.0))
    if not M > 0:
        raise ConfigError("--M must be positive")
    k = int(cfg.options.get("k", 0))
    meas = dmpk_measure(M)
    bundle = build_bundle(meas, cfg.alpha, k, factor=str(cfg.options.get("weight_factor", "dmpk")))
    checks = identity_checks(bundle) + model_checks(cfg.alpha)
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'worst':>10}  {'tol':>8}  result"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {c.value:10.2e}  {c.tol:8.0e}  "
                     f"{'PASS' if c.passed else 'FAIL'}")
    ok = all(c.passed for c in checks)
    header = _header(cfg, ["D Dtilde h(scriptJ) = 1", "scalar jump on gamma_1",
                           "model determinants and jumps", "Airy and Bessel connection identities"],
                     {"M": M, "alpha": cfg.alpha, "k": k}, {"all_passed": ok})
    rows = [(c.name, c.value, c.tol, c.passed) for c in checks]
    return Artifact(header, ["check", "worst", "tol", "passed"], rows,
                    table="\n".join(lines) + "\n", status=0 if ok else 1)


HANDLERS = {
    "curve": cmd_curve,
    "eqmeasure": cmd_eqmeasure,
    "dmpk": cmd_dmpk,
    "polys": cmd_polys,
    "compare": cmd_compare,
    "kernel": cmd_kernel,
    "parametrix-check": cmd_parametrix_check,
}


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    art = HANDLERS[cfg.command](cfg)
    text = render(art, "json" if art.payload is not None else cfg.format)
    if cfg.output_path:
        atomic_write(cfg.output_path, text)
        if cfg.emit_gnuplot and art.columns:
            atomic_write(cfg.output_path + ".gp", gnuplot_script(art, cfg.output_path))
        if art.table:
            stdout.write(art.table)
    else:
        stdout.write(art.table if art.table and cfg.format == "csv" else text)
    return art.status


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--precision", type=int, default=None,
                        help=f"mantissa bits for the exact engine (>= {MIN_PRECISION_BITS}); "
                             f"{PRECISION_ENV} overrides")
    common.add_argument("--emit-gnuplot", action="store_true",
                        help="also write <output>.gp, a gnuplot script for the CSV")

    parser = _Parser(prog="sinh-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("curve", parents=[common], help="spectral curve for a map parameter")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--nodes", type=int, default=512)

    p = sub.add_parser("eqmeasure", parents=[common], help="equilibrium measure on a grid")
    p.add_argument("--potential", default="linear:M=1")
    p.add_argument("--grid", type=int, default=200)

    p = sub.add_parser("dmpk", parents=[common], help="DMPK density rho(x; M)")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--grid", type=int, default=200)

    for name, help_text in (("polys", "exact biorthogonal polynomials"),
                            ("kernel", "diagonal of the correlation kernel"),
                            ("compare", "exact versus asymptotic error table")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--potential", default="linear:M=1")
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--weight-factor", choices=("dmpk", "one"), default="dmpk")
        if name == "polys":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--deg", type=int, required=True)
        elif name == "kernel":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--grid", type=int, default=200)
            p.add_argument("--xmax", type=float, default=None)
        else:
            p.add_argument("--n", default="10,20,40", help="comma-separated n values")
            p.add_argument("--k", type=int, default=0)
            p.add_argument("--regions", default=",".join(REGION_NAMES))

    p = sub.add_parser("parametrix-check", parents=[common], help="identity suites, pass/fail table")
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--weight-factor", choices=("dmpk", "one"), default="dmpk")
    return parser


_CONFIG_KEYS = {"command", "output", "format", "precision", "emit_gnuplot", "potential", "alpha"}


def config_from_args(argv: Sequence[str], environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    ns = build_parser().parse_args(list(argv))
    bits = ns.precision
    env = environ.get(PRECISION_ENV)
    if env not in (None, ""):
        try:
            bits = int(env)
        except ValueError:
            raise ConfigError(f"{PRECISION_ENV} must be an integer, got {env!r}") from None
    options = {k: v for k, v in vars(ns).items() if k not in _CONFIG_KEYS}
    return RunConfig(command=ns.command,
                     potential_spec=getattr(ns, "potential", "linear:M=1"),
                     alpha=float(getattr(ns, "alpha", 0.0)),
                     precision_bits=bits, output_path=ns.output, format=ns.format,
                     emit_gnuplot=ns.emit_gnuplot, options=options)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        if cfg.command in ("eqmeasure", "polys", "compare", "kernel"):
            from .equilibrium import Potential
            Potential.from_spec(cfg.potential_spec)  # fail before any work
        return run(cfg)
    except ConfigError as exc:
        print(f"sinh-lab: configuration error: {exc}", file=sys.stderr)
        return 2
    except SinhLabError as exc:
        print(f"sinh-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
