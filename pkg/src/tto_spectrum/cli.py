"""Command-line front end.

    tto-spectrum scan       --config problem.json --out results/
    tto-spectrum three-term --config theta.json --a 1 --b 0 --c 4 --out results/
    tto-spectrum oracle     --config problem.json --out results/
    tto-spectrum spe 1 0 0.1
    tto-spectrum inner-eval --config theta.json --z 0.5 --z 0.3+0.2j

Exit codes: 0 success, 2 configuration or precondition error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import svg
from .eigensolver import default_tau_res, default_truncation, scan_eigenvalues
from .errors import DegenerateMap, PreconditionError, TruncationWarning, TTOError
from .inner import InnerFunction, eval_derivative, eval_exterior, eval_inner
from .oracle import build_matrix, default_region, dense_spectrum
from .symbols import LaurentSymbol, eval_symbol, spe_test
from .three_term import AnnulusProblem, analyze, outer_radius

log = logging.getLogger("tto_spectrum")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


# -- configuration ------------------------------------------------------------


@dataclass
class ProblemConfig:
    theta: InnerFunction
    symbol: LaurentSymbol | None = None
    region: tuple | None = None
    grid: int = 64
    truncation: int | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.truncation if self.truncation is not None else default_truncation(self.theta)

    @property
    def tau_res(self) -> float:
        return float(self.tolerances.get("tau_res", default_tau_res(self.theta)))

    def to_dict(self) -> dict:
        d = {"theta": self.theta.to_dict()}
        if self.symbol is not None:
            d["symbol"] = self.symbol.to_dict()
        if self.region is not None:
            d["region"] = dict(zip(("re_min", "re_max", "im_min", "im_max"), self.region))
        d["grid"] = self.grid
        d["truncation"] = self.K
        d["tolerances"] = dict(sorted(self.tolerances.items()))
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if "theta" not in data:
            raise ConfigError("config needs a 'theta' entry")
        try:
            theta = InnerFunction.from_dict(data["theta"])
            symbol = LaurentSymbol.from_dict(data["symbol"]) if "symbol" in data else None
            region = None
            if "region" in data:
                r = data["region"]
                region = tuple(float(r[k]) for k in ("re_min", "re_max", "im_min", "im_max"))
            grid = int(data.get("grid", 64))
            trunc = data.get("truncation")
            tol = {str(k): float(v) for k, v in dict(data.get("tolerances", {})).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad config: {exc}") from exc
        return cls(theta, symbol, region, grid, None if trunc is None else int(trunc), tol)


def load_config(path: str | None) -> dict:
    if path is None:
        raise ConfigError("--config is required")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"not a complex number: {text!r}") from exc


# -- output -------------------------------------------------------------------


def _pair(w: complex) -> list:
    return [float(w.real), float(w.imag)]


def dumps(obj) -> str:
    """Deterministic JSON: insertion-ordered keys, shortest round-trip floats."""
    return json.dumps(obj, indent=1, allow_nan=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _apply_overrides(cfg: ProblemConfig, args) -> ProblemConfig:
    if getattr(args, "grid", None) is not None:
        cfg.grid = args.grid
    if getattr(args, "truncation", None) is not None:
        cfg.truncation = args.truncation
    if getattr(args, "tol_res", None) is not None:
        cfg.tolerances["tau_res"] = args.tol_res
    return cfg


def _symbol_curve(phi: LaurentSymbol, n: int = 720) -> np.ndarray:
    z = np.exp(2j * np.pi * np.arange(n + 1) / n)
    anti = sum(a * z ** (-k) for k, a in enumerate(phi.antianalytic, start=1))
    return anti + phi.analytic_part(z)


# -- subcommands ----------------------------------------------------------------


def cmd_scan(args) -> int:
    cfg = _apply_overrides(ProblemConfig.from_dict(load_config(args.config)), args)
    if cfg.symbol is None:
        raise ConfigError("scan needs a 'symbol' entry")
    region = cfg.region if cfg.region is not None else default_region(cfg.symbol)
    if not (region[1] > region[0] and region[3] > region[2]):
        raise PreconditionError("empty region")
    kw = {}
    if "tau_eig" in cfg.tolerances:
        kw["tau_eig"] = cfg.tolerances["tau_eig"]
    res = scan_eigenvalues(cfg.theta, cfg.symbol, region, grid=cfg.grid, K=cfg.K, tau_res=cfg.tau_res, **kw)
    out = Path(args.out)
    report = {
        "config": cfg.to_dict(),
        "region": list(region),
        "eigenpairs": [p.to_dict() for p in res.eigenpairs],
        "excluded_count": len(res.excluded),
        "circle_root_cells": len(res.curve_cells),
        "failures": [{"seed": _pair(s), "reason": r} for s, r in res.failures],
    }
    write_atomic(out / "eigenpairs.json", dumps(report))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "sigma_min"])
    for i, y in enumerate(res.im):
        for j, x in enumerate(res.re):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(res.sigma[i, j]))])
    write_atomic(out / "scan.csv", buf.getvalue())

    cell = (res.re[1] - res.re[0], res.im[1] - res.im[0])
    nodes = sorted(set(zip(*map(list, np.nonzero(np.isnan(res.sigma))))) | set(res.curve_cells))
    grid_excl = [complex(res.re[j], res.im[i]) for i, j in nodes]
    write_atomic(out / "spectrum.svg",
                 svg.spectrum_svg(region, res.eigenvalues, grid_excl, _symbol_curve(cfg.symbol), cell))
    for lam in res.eigenvalues:
        print(f"eigenvalue {lam.real:.12g}{lam.imag:+.12g}j")
    print(f"{len(res.eigenpairs)} eigenpairs written to {out / 'eigenpairs.json'}")
    return EXIT_OK


def cmd_three_term(args) -> int:
    data = load_config(args.config) if args.config else {"theta": {"blaschke": [{"zero": [0.0, 0.0], "mult": 1}]}}
    cfg = _apply_overrides(ProblemConfig.from_dict(data), args)
    coef = {}
    for name in ("a", "b", "c"):
        val = getattr(args, name)
        if val is None:
            if name not in data:
                raise ConfigError(f"coefficient {name} missing (flag --{name} or config key)")
            val = data[name]
            val = complex(*val) if isinstance(val, list) else parse_complex(val)
        else:
            val = parse_complex(val)
        coef[name] = val
    prob = AnnulusProblem(coef["a"], coef["b"], coef["c"], cfg.theta)
    if abs(abs(prob.beta) - 1.0) < 1e-12:
        raise PreconditionError("|a| = |c|: |beta| = 1, the annulus path is empty")
    rep = analyze(prob, contour_inset=args.inset, K=cfg.K, tau_res=cfg.tau_res,
                  mixed_samples=args.mixed_samples)
    out = Path(args.out)
    d = {"a": _pair(prob.a), "b": _pair(prob.b), "c": _pair(prob.c), "theta": cfg.theta.to_dict()}
    d.update(rep.to_dict())
    write_atomic(out / "wert_report.json", dumps(d))

    if abs(prob.beta) < 1:
        r_out = outer_radius(prob, args.inset)
        zs = [s.z1 for s in rep.solutions] + [s.z2 for s in rep.solutions if not s.trivial]
        triv = [s.z1 for s in rep.solutions if s.trivial]
        picture = svg.annulus_svg(abs(prob.beta), zs, triv, r_out)
    else:
        r_out = outer_radius(prob.reflected(), args.inset)
        zs = [s.z1 for s in rep.solutions] + [s.z2 for s in rep.solutions if not s.trivial]
        triv = [s.z1 for s in rep.solutions if s.trivial]
        picture = svg.annulus_svg(1.0, zs, triv, abs(prob.beta))
    write_atomic(out / "annulus.svg", picture)
    print(f"beta = {prob.beta}; psi_pole_count = {rep.psi_pole_count}; "
          f"{len(rep.solutions)} solutions; confirmed eigenvalues: "
          + ", ".join(f"{l.real:.12g}{l.imag:+.12g}j" for l in rep.confirmed_lambdas()))
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = ProblemConfig.from_dict(load_config(args.config))
    if cfg.symbol is None:
        raise ConfigError("oracle needs a 'symbol' entry")
    tto = build_matrix(cfg.theta, cfg.symbol)
    spectrum = dense_spectrum(tto)
    report = {
        "config": cfg.to_dict(),
        "basis": tto.basis.kind,
        "quadrature_points": tto.basis.L,
        "gram_check": tto.basis.gram_check,
        "matrix": [[_pair(x) for x in row] for row in tto.matrix],
        "spectrum": [
            {"lambda": _pair(e.lam), "condition": e.condition, "ill_conditioned": e.ill_conditioned,
             "vector": [_pair(x) for x in e.vector]}
            for e in spectrum
        ],
    }
    write_atomic(Path(args.out) / "oracle.json", dumps(report))
    for e in spectrum:
        print(f"eigenvalue {e.lam.real:.12g}{e.lam.imag:+.12g}j  cond {e.condition:.3g}")
    return EXIT_OK


def cmd_spe(args) -> int:
    a, b, c = (parse_complex(x) for x in (args.a, args.b, args.c))
    res = spe_test(a, b, c).to_dict()
    text = dumps(res)
    if args.out:
        write_atomic(Path(args.out) / "spe.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_inner_eval(args) -> int:
    data = load_config(args.config)
    theta = ProblemConfig.from_dict(data).theta
    points = [parse_complex(z) for z in (args.z or [])]
    if not points:
        raise ConfigError("give at least one --z point")
    rows = []
    for z in points:
        row = {"z": _pair(z)}
        if abs(z) > 1:
            row["value"] = _pair(eval_exterior(theta, z))
            row["region"] = "exterior"
        else:
            row["value"] = _pair(eval_inner(theta, z))
            row["region"] = "disk" if abs(z) < 1 else "circle"
            if abs(z) < 1:
                row["derivative"] = _pair(eval_derivative(theta, z))
        if "symbol" in data and z != 0:
            row["symbol"] = _pair(eval_symbol(LaurentSymbol.from_dict(data["symbol"]), z))
        rows.append(row)
    text = dumps({"theta": theta.to_dict(), "points": rows})
    if args.out:
        write_atomic(Path(args.out) / "inner_eval.json", text)
    sys.stdout.write(text)
    return EXIT_OK


# -- entry point ------------------------------------------------------------------


def _summarise_warnings(caught) -> None:
    trunc = [w for w in caught if issubclass(w.category, TruncationWarning)]
    if trunc:
        print(f"warning: {len(trunc)} truncation warnings; first: {trunc[0].message}", file=sys.stderr)
    for w in caught:
        if not issubclass(w.category, TruncationWarning):
            print(f"warning: {w.message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tto-spectrum", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="results"):
        sp.add_argument("--config", help="problem JSON")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--grid", type=int, help="lambda grid resolution per axis")
        sp.add_argument("--truncation", type=int, help="Fourier truncation K")
        sp.add_argument("--tol-res", type=float, help="residual gate for eigenpairs")

    sp = sub.add_parser("scan", help="locate eigenvalues in a rectangle")
    common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("three-term", help="annulus solver for a*conj(z) + b + c*z")
    common(sp)
    sp.add_argument("--a")
    sp.add_argument("--b")
    sp.add_argument("--c")
    sp.add_argument("--inset", type=float, default=1e-3, help="contour inset from the circle")
    sp.add_argument("--mixed-samples", type=int, default=200)
    sp.set_defaults(func=cmd_three_term)

    sp = sub.add_parser("oracle", help="dense matrix and spectrum (finite Blaschke theta)")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("spe", help="does the complement of Phi(D) meet the disk?")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("c")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_spe)

    sp = sub.add_parser("inner-eval", help="evaluate theta (and optionally Phi) at points")
    sp.add_argument("--config")
    sp.add_argument("--z", action="append", help="point, e.g. 0.5 or 0.3+0.2j (repeatable)")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_inner_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            code = args.func(args)
        _summarise_warnings(caught)
        return code
    except (ConfigError, DegenerateMap, ValueError, KeyError, TypeError) as exc:
        # PreconditionError, DomainError and NotFiniteBlaschke are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TTOError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
