"""Command-line experiment runner with machine-readable outputs.

Experiments wrap the library into reproducible runs: JSON for structured
results (canonical key order, so identical configs give byte-identical
bodies) and CSV for grid curves.  Exit codes: 0 success, 1 invalid input,
2 mathematically meaningful rejection (hypotheses not satisfied).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .asymptotics import even_odd_limits, oscillation_report
from .distributions import (NoiseDistribution, SourceDistribution, as_noise,
                            bernoulli_noise, make_fejer, make_gaussian,
                            make_laplace, make_uniform, product)
from .errors import (InvalidParameterError, LltLabError, UnknownDistributionError,
                     UnsupportedError)
from .inversion import Grid, grid_1d, grid_2d
from .lattice import (check_pi_lattice_zeros, poisson_check, regularity_integral,
                      wrapped_autocorrelation)
from .smoothing import (SmoothedModel, convergence_study, density,
                        distance_to_gaussian)

__all__ = ["ExperimentConfig", "parse_spec", "parse_noise_spec", "run", "main"]

EXPERIMENTS = ("check-condition", "poisson", "autocorr", "density",
               "converge", "oscillate", "limits", "regularity")


# ---------------------------------------------------------------------------
# distribution spec strings
# ---------------------------------------------------------------------------

def _parse_params(name: str, body: str, spec: str) -> dict:
    params = {}
    if not body:
        return params
    for tok in body.split(","):
        if "=" not in tok:
            raise UnknownDistributionError(
                f"bad parameter token {tok!r} at position {spec.find(tok)} in {spec!r}")
        key, val = tok.split("=", 1)
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UnknownDistributionError(
                f"non-numeric value {val!r} for parameter {key!r} in {spec!r}")
    return params


def parse_spec(text: str) -> SourceDistribution:
    """Resolve a catalog spec such as 'uniform:h=1', 'laplace:b=2',
    'gaussian:sigma=1', 'fejer:T=0.7' or 'product:uniform:h=1,uniform:h=1'."""
    spec = text.strip()
    if not spec:
        raise UnknownDistributionError("empty distribution spec")
    if spec.startswith("product:"):
        body = spec[len("product:"):]
        if not body:
            raise UnknownDistributionError(f"product needs components in {spec!r}")
        comps = [parse_spec(tok) for tok in body.split(",")]
        return product(comps)
    name, _, body = spec.partition(":")
    params = _parse_params(name, body, spec)
    try:
        if name == "uniform":
            return make_uniform(params.pop("h", 1.0))
        if name == "laplace":
            return make_laplace(params.pop("b", 1.0))
        if name == "gaussian":
            return make_gaussian(params.pop("sigma", 1.0))
        if name == "fejer":
            return make_fejer(params.pop("T", 1.0))
    except InvalidParameterError:
        raise
    raise UnknownDistributionError(f"unknown distribution: {name}")


def parse_noise_spec(text: str, dim: int) -> NoiseDistribution:
    """Resolve a noise spec: 'bernoulli' (any dim), 'uniform' (the isotropic
    law on [-sqrt 3, sqrt 3]), 'gaussian', or an explicit unit-variance
    catalog spec."""
    spec = text.strip()
    if spec in ("bernoulli", ""):
        return bernoulli_noise(dim)
    if dim != 1:
        raise UnsupportedError("non-Bernoulli noise is catalogued for dim 1 only")
    if spec == "uniform":
        return as_noise(make_uniform(math.sqrt(3.0)))
    if spec == "gaussian":
        return as_noise(make_gaussian(1.0))
    return as_noise(parse_spec(spec), tol=1e-6)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    source: str
    noise: str = "bernoulli"
    n_schedule: tuple = ()
    grid_min: float = -5.0
    grid_max: float = 5.0
    grid_points: int = 1001
    norm: str = "l2"
    tol: float = 1e-9
    trunc_k: int = 20
    kind: str = "condition_3_1"
    seed: int = 0
    out_json: Optional[str] = None
    out_csv: Optional[str] = None

    def to_mapping(self) -> dict:
        d = asdict(self)
        d["n_schedule"] = list(self.n_schedule)
        return d

    @classmethod
    def from_mapping(cls, m: dict) -> "ExperimentConfig":
        m = dict(m)
        m["n_schedule"] = tuple(int(v) for v in m.get("n_schedule", ()))
        return cls(**m)


def _parse_schedule(text: str) -> tuple:
    try:
        vals = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise InvalidParameterError(f"bad n schedule: {text!r}")
    if not vals:
        raise InvalidParameterError("empty n schedule")
    return vals


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidParameterError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# experiment implementations
# ---------------------------------------------------------------------------

def _build_model(cfg: ExperimentConfig) -> SmoothedModel:
    src = parse_spec(cfg.source)
    noise = parse_noise_spec(cfg.noise, src.dim)
    return SmoothedModel(src, noise)


def _grid_from_cfg(cfg: ExperimentConfig, dim: int) -> Grid:
    if dim == 1:
        return grid_1d(cfg.grid_min, cfg.grid_max, cfg.grid_points)
    return grid_2d(cfg.grid_min, cfg.grid_max, cfg.grid_points)


def _run_check_condition(cfg):
    src = parse_spec(cfg.source)
    rep = check_pi_lattice_zeros(src, cfg.trunc_k)
    cond = rep.max_abs <= max(cfg.tol, 1e-12)
    return {"max_abs": rep.max_abs, "argmax_k": list(rep.argmax_k),
            "condition_holds": bool(cond)}, None


def _run_poisson(cfg):
    src = parse_spec(cfg.source)
    rep = poisson_check(src, tol=cfg.tol)
    return {"lhs": rep.lhs, "rhs": rep.rhs, "gap": rep.gap,
            "error_estimates": {"lhs_tail": rep.lhs_tail,
                                "rhs_tail": rep.rhs_tail}}, None


def _run_autocorr(cfg):
    src = parse_spec(cfg.source)
    val = wrapped_autocorrelation(src, tol=cfg.tol)
    target = 0.5 ** src.dim
    return {"value": val, "target": target, "deviation": abs(val - target),
            "error_estimates": {"series_tol": cfg.tol}}, None


def _run_density(cfg):
    model = _build_model(cfg)
    if not cfg.n_schedule:
        raise InvalidParameterError("density experiment needs --n")
    n = cfg.n_schedule[-1]
    grid = _grid_from_cfg(cfg, model.dim)
    gd = density(model, n, grid, tol=cfg.tol)
    res = {"n": n,
           "error_estimates": {"density_tail": gd.meta.get("est_tail_error", 0.0)},
           "engine": gd.meta.get("engine", ""),
           "mass": gd.mass(),
           "sup_distance_to_gaussian": distance_to_gaussian(gd, "sup")}
    rows = None
    if model.dim == 1:
        x = gd.axes[0].points()
        phi = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
        rows = {"x": x, "p_n": gd.values, "phi": phi}
    return res, rows


def _run_converge(cfg):
    model = _build_model(cfg)
    if not cfg.n_schedule:
        raise InvalidParameterError("converge experiment needs --n")
    grid = _grid_from_cfg(cfg, model.dim)
    rep = convergence_study(model, cfg.n_schedule, cfg.norm, grid, tol=cfg.tol)
    return {
        "n_schedule": list(rep.n_schedule),
        "distances": {k: list(v) for k, v in rep.distances.items()},
        "fitted_log_slope": rep.fitted_log_slope,
        "even_slope": rep.even_slope,
        "odd_slope": rep.odd_slope,
        "slope_norm": rep.slope_norm,
        "condition_max_abs": rep.condition_max_abs,
        "error_estimates": {"density_tails": list(rep.est_errors)},
        "grid_meta": rep.grid_meta,
    }, None


def _run_oscillate(cfg):
    model = _build_model(cfg)
    if not cfg.n_schedule:
        raise InvalidParameterError("oscillate experiment needs --n")
    n = cfg.n_schedule[-1]
    grid = _grid_from_cfg(cfg, 1)
    rep = oscillation_report(model, n, grid, tol=cfg.tol)
    gd = density(model, n, grid, tol=cfg.tol)
    x = grid.axes[0].points()
    phi = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    rows = {"x": x, "p_n": gd.values, "phi": phi, "A_n": rep.a_values,
            "residual": gd.values - rep.a_values * phi}
    return {"n": n, "residual_sup": rep.residual_sup,
            "period_defect": rep.period_defect,
            "method_gap": rep.method_gap,
            "error_estimates": rep.meta}, rows


def _run_limits(cfg):
    src = parse_spec(cfg.source)
    lim = even_odd_limits(src, tol=cfg.tol)
    return {"even": lim.even_limit, "odd": lim.odd_limit, "route": lim.route,
            "error_estimates": {"series_tol": cfg.tol}}, None


def _run_regularity(cfg):
    src = parse_spec(cfg.source)
    rep = regularity_integral(src, cfg.kind, max(cfg.trunc_k, 4))
    return {"estimate": rep.estimate, "diverging": rep.diverging,
            "shell_contributions": list(rep.shell_contributions)}, None


_RUNNERS = {
    "check-condition": _run_check_condition,
    "poisson": _run_poisson,
    "autocorr": _run_autocorr,
    "density": _run_density,
    "converge": _run_converge,
    "oscillate": _run_oscillate,
    "limits": _run_limits,
    "regularity": _run_regularity,
}

_CSV_COLUMNS = ("x", "p_n", "phi", "A_n", "residual")


def canonical_json_body(body: dict) -> str:
    return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=True)


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment; writes the JSON document (and CSV when the
    experiment is grid-valued) and returns the process exit status."""
    if cfg.experiment not in _RUNNERS:
        raise InvalidParameterError(f"unknown experiment: {cfg.experiment}")
    results, rows = _RUNNERS[cfg.experiment](cfg)
    config_echo = cfg.to_mapping()
    # output paths carry no experiment semantics; echoing them would break
    # the byte-identical-body determinism contract
    config_echo.pop("out_json", None)
    config_echo.pop("out_csv", None)
    body = {
        "experiment": cfg.experiment,
        "config": config_echo,
        "library_version": __version__,
        "results": results,
    }
    doc = {"created_unix": time.time(), "body": body}
    if cfg.out_json:
        with open(cfg.out_json, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"created_unix": doc["created_unix"]},
                                separators=(",", ":"))[:-1])
            fh.write(',"body":')
            fh.write(canonical_json_body(body))
            fh.write("}\n")
    else:
        sys.stdout.write(canonical_json_body(body) + "\n")
    if rows is not None and cfg.out_csv:
        cols = [c for c in _CSV_COLUMNS if c in rows]
        with open(cfg.out_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            nrow = len(np.asarray(rows[cols[0]]))
            for i in range(nrow):
                writer.writerow([repr(float(np.asarray(rows[c])[i])) for c in cols])
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="llt-lab",
        description="numerical experiments on noise-smoothed random walks")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--source", help="source distribution spec, e.g. laplace:b=1")
    ap.add_argument("--noise",
                    help="noise spec: bernoulli | uniform | gaussian (default bernoulli)")
    ap.add_argument("--n", dest="n_schedule",
                    help="comma-separated n schedule, e.g. 4,16,64,256")
    ap.add_argument("--grid", help="grid as min,max,points (default -5,5,1001)")
    ap.add_argument("--norm", choices=("l1", "l2", "sup"))
    ap.add_argument("--tol", type=float)
    ap.add_argument("--k", dest="trunc_k", type=int,
                    help="lattice window for condition checks / regularity shells")
    ap.add_argument("--kind", choices=("condition_2_3", "condition_3_1"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", dest="out_json", help="JSON output path")
    ap.add_argument("--csv", dest="out_csv", help="CSV output path")
    ap.add_argument("--config", help="key=value config file; explicit flags override it")
    return ap


def _config_from_args(argv: Sequence[str]) -> ExperimentConfig:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    file_vals = _read_config_file(ns.config) if ns.config else {}

    def pick(flag_val, key, conv, default):
        if flag_val is not None:
            return flag_val
        if key in file_vals:
            return conv(file_vals[key])
        return default

    source = pick(ns.source, "source", str, None)
    if not source:
        raise InvalidParameterError("--source is required")
    sched_text = pick(ns.n_schedule, "n_schedule", str, None)
    schedule = _parse_schedule(sched_text) if sched_text else ()
    gmin, gmax, gpts = -5.0, 5.0, 1001
    grid_text = pick(ns.grid, "grid", str, None)
    if grid_text:
        toks = grid_text.split(",")
        if len(toks) != 3:
            raise InvalidParameterError(f"bad grid spec: {grid_text!r}")
        gmin, gmax, gpts = float(toks[0]), float(toks[1]), int(toks[2])
    return ExperimentConfig(
        experiment=ns.experiment,
        source=source,
        noise=pick(ns.noise, "noise", str, "bernoulli"),
        n_schedule=schedule,
        grid_min=gmin, grid_max=gmax, grid_points=gpts,
        norm=pick(ns.norm, "norm", str, "l2"),
        tol=pick(ns.tol, "tol", float, 1e-9),
        trunc_k=pick(ns.trunc_k, "trunc_k", int, 20),
        kind=pick(ns.kind, "kind", str, "condition_3_1"),
        seed=pick(ns.seed, "seed", int, 0),
        out_json=pick(ns.out_json, "out_json", str, None),
        out_csv=pick(ns.out_csv, "out_csv", str, None),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = _config_from_args(argv)
        return run(cfg)
    except UnsupportedError as exc:
        print(f"hypotheses not satisfied: {exc}", file=sys.stderr)
        return 2
    except (InvalidParameterError, LltLabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
