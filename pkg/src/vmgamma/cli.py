"""Command-line front end: JSON model config in, CSV out.

Exit codes: 0 success, 2 domain error, 3 convergence failure, 4 invalid
input, 1 anything else. Errors print one line ``error: <category>: <reason>``
on stderr.
"""
import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .density import density_R_fft
from .errors import ConvergenceError, DomainError, ValidationError, VMGammaError
from .presets import baseline_config
from .process import VMGammaParams
from .simulation import sample_R
from .transforms import (MarketModel, correlation_sqrt, moment_summary, risk_neutral_market,
                         solve_esscher)

__all__ = ["ModelConfig", "parse_config", "run", "main"]

SCHEMA = 1
EXIT_CODES = {DomainError: 2, ConvergenceError: 3, ValidationError: 4}
_KNOWN = {"schema", "d", "k", "n", "b", "M", "mu", "sigma", "A", "rho", "m", "q", "r", "S0",
          "lattice", "grid"}


@dataclass
class ModelConfig:
    params: VMGammaParams
    A: np.ndarray
    m: np.ndarray
    q: np.ndarray
    r: float
    S0: np.ndarray
    rho: Optional[float] = None
    lattice: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    def market(self) -> MarketModel:
        return MarketModel(params=self.params, A=self.A, m=self.m, q=self.q, r=self.r, S0=self.S0)


def _array(doc, name, ndim):
    if name not in doc:
        raise ValidationError(f"{name}: missing")
    try:
        arr = np.asarray(doc[name], dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{name}: expected numbers") from None
    if arr.ndim != ndim:
        raise ValidationError(f"{name}: expected a {ndim}-d array, got shape {arr.shape}")
    return arr


def parse_config(text: str) -> ModelConfig:
    """Parse and validate a JSON model configuration.

    Exactly one of ``A`` (a ``k x d`` matrix) and ``rho`` (``k = d = 2``) must
    be given. Optional ``d``, ``k`` and ``n`` are checked against the arrays.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config: top level must be an object")
    unknown = sorted(set(doc) - _KNOWN)
    if unknown:
        raise ValidationError(f"{unknown[0]}: unknown field")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ValidationError(f"schema: unsupported version {doc.get('schema')!r}")

    b = _array(doc, "b", 1)
    M = _array(doc, "M", 2)
    mu = _array(doc, "mu", 1)
    sigma = _array(doc, "sigma", 1)
    params = VMGammaParams(b=b, M=M, mu=mu, sigma=sigma)
    for key, val in (("d", params.d), ("n", params.n)):
        if key in doc and doc[key] != val:
            raise ValidationError(f"{key}: declared {doc[key]} but arrays imply {val}")

    if ("A" in doc) == ("rho" in doc):
        raise ValidationError("A/rho: give exactly one of A and rho")
    rho = None
    if "rho" in doc:
        if params.d != 2:
            raise ValidationError("rho: only valid when d = 2")
        rho = float(doc["rho"])
        if not -1.0 <= rho <= 1.0:
            raise ValidationError("rho: must lie in [-1, 1]")
        A = correlation_sqrt(rho)
    else:
        A = _array(doc, "A", 2)
    k = A.shape[0]
    if "k" in doc and doc["k"] != k:
        raise ValidationError(f"k: declared {doc['k']} but A has {k} rows")
    m = _array(doc, "m", 1)
    q = _array(doc, "q", 1) if "q" in doc else np.zeros(k)
    S0 = _array(doc, "S0", 1)
    for name, arr in (("m", m), ("q", q), ("S0", S0)):
        if arr.size != k:
            raise ValidationError(f"{name}: expected length {k}, got {arr.size}")
    if "r" not in doc:
        raise ValidationError("r: missing")
    try:
        r = float(doc["r"])
    except (TypeError, ValueError):
        raise ValidationError("r: expected a number") from None
    lattice = doc.get("lattice", {}) or {}
    grid = doc.get("grid", {}) or {}
    if not isinstance(lattice, dict) or not isinstance(grid, dict):
        raise ValidationError("lattice/grid: expected objects")
    cfg = ModelConfig(params=params, A=A, m=m, q=q, r=r, S0=S0, rho=rho, lattice=lattice, grid=grid)
    cfg.market()  # surfaces domain problems (kappa) at parse time
    return cfg


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer, str)):
        return str(x)
    return format(float(x), ".17g")


def _write(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _cmd_moments(cfg, args, out):
    mean, vol, corr = moment_summary(cfg.market(), args.t)
    k = mean.size
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    header = (["t"] + [f"mean_{i + 1}" for i in range(k)] + [f"vol_{i + 1}" for i in range(k)]
              + [f"corr_{i + 1}{j + 1}" for i, j in pairs])
    _write(out, header, [[args.t, *mean, *vol, *[corr[i, j] for i, j in pairs]]])


def _cmd_esscher(cfg, args, out):
    market = cfg.market()
    sol = solve_esscher(market)
    qm, _ = risk_neutral_market(market, sol)
    mean, vol, corr = moment_summary(qm, 1.0)
    rows = [["h", i + 1, "", v] for i, v in enumerate(sol.h)]
    rows += [["mu", i + 1, "", v] for i, v in enumerate(qm.params.mu)]
    rows += [["M", i + 1, j + 1, qm.params.M[i, j]] for i in range(qm.params.d) for j in range(qm.params.n)]
    rows += [["q_mean", i + 1, "", v] for i, v in enumerate(mean)]
    rows += [["q_vol", i + 1, "", v] for i, v in enumerate(vol)]
    rows += [["q_corr", i + 1, j + 1, corr[i, j]] for i in range(qm.k) for j in range(i + 1, qm.k)]
    rows += [["residual", "", "", sol.residual], ["iterations", "", "", sol.iterations]]
    _write(out, ["quantity", "i", "j", "value"], rows)


def _measure_market(cfg, measure):
    market = cfg.market()
    if measure == "Q":
        market, _ = risk_neutral_market(market)
    return market


def _cmd_density(cfg, args, out):
    market = _measure_market(cfg, args.measure)
    counts = args.counts or cfg.grid.get("counts", 256)
    extent = args.extent or cfg.grid.get("extent", 8.0)
    grid = density_R_fft(market, args.t, counts=counts, extent=extent)
    meta = {"t": args.t, "rho": cfg.rho, "measure": args.measure, "counts": list(grid.counts),
            "extent": extent, "origin": grid.origin.tolist(), "spacing": grid.spacing.tolist(),
            "raw_mass": grid.raw_mass, "clipped_mass": grid.clipped_mass}
    out.write("# " + json.dumps(meta) + "\n")
    pts = grid.points()
    k = pts.shape[1]
    _write(out, [f"y{i + 1}" for i in range(k)] + ["density"],
           np.column_stack([pts, grid.values.ravel()]))


def _lattice_spec(cfg, args):
    from .pricing import LatticeSpec
    opts = dict(cfg.lattice)
    if args.counts:
        opts["counts"] = args.counts
    if args.steps:
        opts["steps"] = args.steps
    if args.dt:
        opts["dt"] = args.dt
    try:
        return LatticeSpec(**opts)
    except TypeError as exc:
        raise ValidationError(f"lattice: {exc}") from None


def _cmd_price(cfg, args, out):
    from .pricing import OptionSpec, price_european_fourier, price_lattice, price_monte_carlo
    option = OptionSpec(args.kind, args.style, args.strike, args.maturity)
    market = cfg.market()
    qm, sol = risk_neutral_market(market)
    if args.method == "lattice":
        res = price_lattice(qm, option, _lattice_spec(cfg, args))
    elif args.method == "fourier":
        res = price_european_fourier(qm, option)
    else:
        res = price_monte_carlo(qm, option, args.paths, args.seed)
    d = res.diagnostics
    header = ["kind", "style", "strike", "maturity", "method", "price", "std_error", "steps", "p0",
              "boundary_mass"]
    _write(out, header, [[option.kind, option.style, option.strike, option.maturity, res.method,
                          res.price, res.std_error, d.get("steps"), d.get("p0"),
                          d.get("boundary_mass")]])


def _cmd_simulate(cfg, args, out):
    market = _measure_market(cfg, args.measure)
    R = sample_R(market, args.t, args.paths, args.seed)
    _write(out, [f"r{i + 1}" for i in range(R.shape[1])], R)


def _int_list(text):
    return [int(v) for v in text.split(",")]


def _float_list(text):
    return [float(v) for v in text.split(",")]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON model config (default: built-in baseline)")
    common.add_argument("--rho", type=float, help="override rho of the config")
    common.add_argument("--rate", type=float, help="override the short rate r")
    common.add_argument("--output", help="write CSV here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="parallelism hint (accepted, unused)")
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="vmgamma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", parents=[common], help="means, volatilities, correlations of R(t)")
    p.add_argument("--t", type=float, default=1.0)

    sub.add_parser("esscher", parents=[common], help="Esscher parameter and risk-neutral parameters")

    p = sub.add_parser("density", parents=[common], help="density grid of R(t) by Fourier inversion")
    p.add_argument("--t", type=float, default=0.25)
    p.add_argument("--counts", type=_int_list)
    p.add_argument("--extent", type=float)
    p.add_argument("--measure", choices=("P", "Q"), default="P")

    p = sub.add_parser("price", parents=[common], help="best-of / worst-of put price")
    p.add_argument("--kind", choices=("best_of", "worst_of", "best_of_put", "worst_of_put"), required=True)
    p.add_argument("--style", choices=("european", "american"), default="european")
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--maturity", type=float, default=0.25)
    p.add_argument("--method", choices=("lattice", "fourier", "mc"), default="lattice")
    p.add_argument("--paths", type=int, default=1_000_000)
    p.add_argument("--counts", type=_int_list)
    p.add_argument("--steps", type=_float_list)
    p.add_argument("--dt", type=float)

    p = sub.add_parser("simulate", parents=[common], help="raw samples of R(t)")
    p.add_argument("--t", type=float, default=0.25)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--measure", choices=("P", "Q"), default="P")
    return parser


_COMMANDS = {"moments": _cmd_moments, "esscher": _cmd_esscher, "density": _cmd_density,
             "price": _cmd_price, "simulate": _cmd_simulate}


def _load_config(args) -> ModelConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"config: cannot read {args.config}: {exc.strerror}") from None
    else:
        text = json.dumps(baseline_config())
    if args.rho is not None or args.rate is not None:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            return parse_config(text)  # reports the line and column
        if not isinstance(doc, dict):
            return parse_config(text)
        if args.rho is not None:
            doc.pop("A", None)
            doc["rho"] = args.rho
        if args.rate is not None:
            doc["r"] = args.rate
        text = json.dumps(doc)
    return parse_config(text)


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run one subcommand; returns the process exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _load_config(args)
        buf = io.StringIO()
        _COMMANDS[args.command](cfg, args, buf)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            stdout.write(buf.getvalue())
        return 0
    except VMGammaError as exc:
        code = next((c for cls, c in EXIT_CODES.items() if isinstance(exc, cls)), 1)
        category = {2: "domain", 3: "convergence", 4: "validation"}.get(code, "error")
        print(f"error: {category}: {' '.join(str(exc).split())}", file=stderr)
        return code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:  # e.g. piped into head
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
