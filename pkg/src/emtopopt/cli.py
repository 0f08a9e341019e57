"""Command-line front end.

``emtopopt run --preset metalens --out-dir out/`` runs a preset (or a
key=value config file), prints ``FOM: <value>`` per iteration and writes
``design.pgm``, ``field.pgm``, ``field.csv``, ``history.csv`` and
``summary.txt``. Exit status: 0 success, 2 bad configuration, 3 solver or
evaluation failure (partial artifacts are still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .exceptions import ConfigurationError
from .filtering import ProjectionSpec
from .material import DielectricSpec, PlasmonicSpec
from .objective import Objective
from .optimize import (
    GAConfig,
    GradientConfig,
    OptimizationError,
    RunHistory,
    optimize_ga,
    optimize_gradient,
    run_continuation,
)
from .output import design_image, field_image, write_history_csv, write_matrix_csv, write_pgm, write_summary
from .problem import PRESETS, ProblemSpec, compute_geometric_na, lens_problem, preset, rescale

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

PROBLEM_KEYS = {
    "nElX", "nElY", "targetX", "targetY", "designStartRow", "designThickness", "lambda", "fR",
    "epsR", "alpha", "n", "kappa", "source", "link", "substrate", "dVini", "scale",
}
RUN_KEYS = {
    "preset", "maxItr", "optimizer", "beta", "eta", "continuation", "betaMax", "betaInc", "seed",
    "populationSize", "resolutionFactor",
}


@dataclass
class RunSettings:
    optimizer: str = "gradient"
    max_iter: int = 200
    beta: float = 5.0
    eta: float = 0.5
    continuation: bool = False
    beta_max: float = 20.0
    beta_inc: float = 1.5
    seed: int = 1
    population_size: int = 200
    wall_time: bool = False
    quiet: bool = False


def parse_config(text: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"config line {lineno}: expected key=value, got {raw!r}")
        key = key.strip()
        if key not in PROBLEM_KEYS | RUN_KEYS:
            raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "on", "yes"):
        return True
    if s in ("0", "false", "off", "no"):
        return False
    raise ConfigurationError(f"expected a boolean, got {v!r}")


def _num(kind, v: str, key: str):
    try:
        return kind(v)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {v!r} as {kind.__name__}") from None


def problem_from_config(cfg: Dict[str, str], base: Optional[ProblemSpec]) -> ProblemSpec:
    """Build a strip-lens problem from config keys, defaulting to ``base``."""
    keys = set(cfg) & PROBLEM_KEYS
    if base is not None and not keys:
        return base
    if base is None:
        missing = {"nElX", "nElY", "targetX", "targetY", "designStartRow", "designThickness", "lambda", "fR"} - set(cfg)
        if missing:
            raise ConfigurationError(f"config without preset needs keys: {', '.join(sorted(missing))}")
    g = base.grid if base is not None else None

    def get(key, kind, default):
        return _num(kind, cfg[key], key) if key in cfg else default

    strip = base.strip if base is not None else (None, None)
    mat = base.material if base is not None else DielectricSpec()
    if "n" in cfg or "kappa" in cfg:
        pm = mat if isinstance(mat, PlasmonicSpec) else PlasmonicSpec()
        mat = PlasmonicSpec(get("n", float, pm.n), get("kappa", float, pm.kappa))
    elif "epsR" in cfg or "alpha" in cfg:
        dm = mat if isinstance(mat, DielectricSpec) else DielectricSpec()
        mat = DielectricSpec(get("epsR", float, dm.eps_r), get("alpha", float, dm.alpha))
    return lens_problem(
        get("nElX", int, g.nelx if g else None),
        get("nElY", int, g.nely if g else None),
        (get("targetX", int, g.target[0] if g else None), get("targetY", int, g.target[1] if g else None)),
        get("designStartRow", int, strip[0]),
        get("designThickness", int, strip[1]),
        get("lambda", float, base.wavelength if base else None),
        get("fR", float, base.filter_radius if base else None),
        mat,
        get("scale", float, g.scale if g else 1e-9),
        source=cfg.get("source", base.source if base else "bottom"),
        link=cfg.get("link", base.link if base else "none"),
        substrate=_bool(cfg["substrate"]) if "substrate" in cfg else (base.substrate if base else True),
        dvini=get("dVini", float, base.dvini if base else 0.5),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emtopopt", description="Topology optimization of 2D photonic lenses and reflectors.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an optimization")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", type=Path, help="key=value problem file")
    run.add_argument("--out-dir", type=Path, default=Path("out"))
    run.add_argument("--max-iter", type=int)
    run.add_argument("--optimizer", choices=("gradient", "ga"))
    run.add_argument("--continuation", action="store_true", default=None, help="beta continuation up to --beta-max")
    run.add_argument("--beta-max", type=float)
    run.add_argument("--beta-inc", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--population-size", type=int)
    run.add_argument("--resolution-factor", type=float)
    run.add_argument("--beta", type=float, help="(starting) threshold sharpness")
    run.add_argument("--eta", type=float, help="threshold level")
    run.add_argument("--filter-radius", type=float, help="override fR (filter-sweep: run only this radius)")
    run.add_argument("--no-substrate", action="store_true")
    run.add_argument("--wall-time", action="store_true", help="fill the seconds column of history.csv")
    run.add_argument("--quiet", action="store_true")
    return parser


def _resolve(args) -> tuple:
    """-> (name, [(label, problem)], settings)"""
    cfg: Dict[str, str] = {}
    if args.config is not None:
        try:
            cfg = parse_config(args.config.read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config: {exc}") from exc
    name = args.preset or cfg.get("preset")
    if name is not None:
        pr = preset(name)
        problems = list(zip(pr.labels or [""] * len(pr.problems), pr.problems))
        settings = RunSettings(optimizer=pr.optimizer, max_iter=pr.max_iter, beta=pr.beta)
    else:
        problems, settings = [("", None)], RunSettings()
        name = args.config.stem
    problems = [(label, problem_from_config(cfg, p)) for label, p in problems]

    s = settings
    run_cfg = {
        "max_iter": ("maxItr", int), "optimizer": ("optimizer", str), "beta": ("beta", float), "eta": ("eta", float),
        "beta_max": ("betaMax", float), "beta_inc": ("betaInc", float), "seed": ("seed", int),
        "population_size": ("populationSize", int),
    }
    for attr, (key, kind) in run_cfg.items():
        if key in cfg:
            s = replace(s, **{attr: _num(kind, cfg[key], key)})
    if "continuation" in cfg:
        s = replace(s, continuation=_bool(cfg["continuation"]))
    for attr in ("max_iter", "optimizer", "beta", "eta", "beta_max", "beta_inc", "seed", "population_size", "continuation"):
        v = getattr(args, attr)
        if v is not None:
            s = replace(s, **{attr: v})
    s = replace(s, wall_time=args.wall_time, quiet=args.quiet)
    if s.optimizer not in ("gradient", "ga"):
        raise ConfigurationError(f"optimizer must be 'gradient' or 'ga', got {s.optimizer!r}")
    if s.continuation and s.optimizer == "ga":
        raise ConfigurationError("continuation applies to the gradient optimizer only")

    if args.filter_radius is not None:
        if name == "filter-sweep":
            problems = [(f"fR{args.filter_radius:g}", p) for _, p in problems[:1]]
        problems = [(label, replace(p, filter_radius=args.filter_radius)) for label, p in problems]
    if args.no_substrate:
        problems = [(label, replace(p, substrate=False)) for label, p in problems]
    factor = args.resolution_factor if args.resolution_factor is not None else _num(float, cfg.get("resolutionFactor", "1"), "resolutionFactor")
    problems = [(label, rescale(p, factor)) for label, p in problems]
    return name, problems, s


def _artifact(out_dir: Path, stem: str, label: str, ext: str) -> Path:
    return out_dir / (f"{stem}_{label}.{ext}" if label else f"{stem}.{ext}")


def run_problem(problem: ProblemSpec, settings: RunSettings, out_dir: Path, label: str = "") -> tuple:
    """Optimize one problem and write its artifacts. Returns ``(exit_code, summary)``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {k: _artifact(out_dir, k, label, ext) for k, ext in
             [("design", "pgm"), ("field", "pgm"), ("fieldcsv", "csv"), ("history", "csv"), ("summary", "txt")]}
    paths["fieldcsv"] = _artifact(out_dir, "field", label, "csv")
    objective = Objective(problem)
    t0 = time.perf_counter()

    def echo(rec):
        if not settings.quiet:
            print(f"FOM: {rec.phi:.6g}", flush=True)

    try:
        if settings.optimizer == "ga":
            cfg = GAConfig(population_size=settings.population_size, generations=settings.max_iter, seed=settings.seed, eta=settings.eta)
            x, history = optimize_ga(problem, cfg, objective=objective, callback=echo)
        elif settings.continuation:
            cfg = GradientConfig(max_iter=settings.max_iter, eta=settings.eta,
                                 continuation=(settings.beta, settings.beta_max, settings.beta_inc))
            x, history = run_continuation(problem, cfg, objective=objective, callback=echo)
        else:
            cfg = GradientConfig(max_iter=settings.max_iter, beta=settings.beta, eta=settings.eta)
            x, history = optimize_gradient(problem, cfg, objective=objective, callback=echo)
    except OptimizationError as exc:
        write_history_csv(paths["history"], exc.history, settings.wall_time)
        write_summary(paths["summary"], {"status": "failed", "error": str(exc).replace("\n", " "),
                                         "manifest": [paths["history"].name, paths["summary"].name]})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER, None

    final = history.final
    working = objective.evaluate(x, ProjectionSpec(final.beta, settings.eta), with_gradient=False)
    if not settings.quiet:
        print("Black/white design evaluation:")
    binary = objective.binarized(x)
    empty = objective.binarized(np.zeros(problem.n_vars))
    if not settings.quiet:
        print(f"FOM: {binary.fom:.6g}")
    wall = time.perf_counter() - t0

    grid = problem.grid
    write_pgm(paths["design"], design_image(binary.projected))
    intensity = binary.field_intensity(grid)
    write_pgm(paths["field"], field_image(intensity))
    write_matrix_csv(paths["fieldcsv"], intensity)
    write_history_csv(paths["history"], history, settings.wall_time)

    transmission = float("nan")
    if problem.strip is not None and problem.strip[0] >= 3:
        row = problem.strip[0] - 2
        ref = objective.transmission_flux(empty.ez, row)
        if ref != 0:
            transmission = objective.transmission_flux(binary.ez, row) / ref

    summary = {
        "status": "ok",
        "finalFOM": final.phi,
        "binarizedFOM": binary.fom,
        "M_nd": objective.non_discreteness(working.projected),
        "NA_geometric": compute_geometric_na(problem),
        "forwardSolves": final.forward_solves,
        "adjointSolves": final.adjoint_solves,
        "wallTime": wall,
        "iterations": final.iteration,
        "betaFinal": final.beta,
        "optimizer": settings.optimizer,
        "emptyFOM": empty.fom,
        "transmissionDiagnostic": transmission,
        "manifest": [p.name for p in paths.values()],
    }
    write_summary(paths["summary"], summary)
    return EXIT_OK, summary


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        name, problems, settings = _resolve(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_OK
    for label, problem in problems:
        if label and not settings.quiet:
            print(f"== {name} {label}")
        try:
            code, _ = run_problem(problem, settings, args.out_dir, label)
        except ConfigurationError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
