"""Command-line front end: ``pdnls <subcommand> --config run.toml --out DIR``.

Every subcommand reads one TOML document, validates all of it before any
computation, writes its outputs under ``--out`` and finishes with a
``manifest.json`` listing the sha256 of every emitted file.

Exit codes: 0 ok, 1 scientific-check failure, 2 configuration error,
3 integrity error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (AccuracyError, ExtrapolationError, IntegrityError, ParameterError,
                     QuadratureError, ResolutionError)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_INTEGRITY = 0, 1, 2, 3
COMMANDS = ("symbol-check", "solve", "sweep", "chain", "diagnose", "trial", "interp-check")
CLASSES = ("full", "Gk", "radial", "axial")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _load_toml(path):
    if sys.version_info >= (3, 11):
        import tomllib
    else:  # pragma: no cover
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc


# --------------------------------------------------------------------------- config


@dataclass
class RunConfig:
    """Validated run configuration.

    TOML layout::

        seed = 0
        eps = [1e-2, 1e-3]
        classes = ["radial", "full"]

        [params]        d, p, s, gamma, k
        [symbol]        kind = "biharmonic" | "shell-power" | "tabulated", ...
        [solver]        SolveConfig fields, with [solver.grid] and [solver.phys]
        [diagnostics]   concentration = true, roughness_t = 1, delta = "default" | number
        [admissibility] s, gamma, eps (defaults from [params] and top-level eps)
        [trial]         kind = "auto" | "knapp" | "radial", calibration_eps
        [interp]        n, seed, d, q, r
        [diagnose]      results = ["path/to/result.json", ...]
    """

    params: object
    symbol: object
    eps_list: list
    classes: list
    solver: object
    diagnostics: dict = field(default_factory=dict)
    admissibility: dict = field(default_factory=dict)
    trial: dict = field(default_factory=dict)
    interp: dict = field(default_factory=dict)
    diagnose: dict = field(default_factory=dict)
    seed: int = 0
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict, seed: int | None = None, eps_floor: float | None = None,
                  base: Path | None = None) -> "RunConfig":
        from .exponents import ProblemParams, SymbolSpec
        from .minimize import SolveConfig

        known = {"seed", "eps", "classes", "params", "symbol", "solver", "diagnostics",
                 "admissibility", "trial", "interp", "diagnose"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            pdoc = dict(doc.get("params", {}))
            if "d" not in pdoc or "p" not in pdoc:
                raise ConfigError("[params] needs d and p")
            params = ProblemParams(**pdoc)
            sdoc = dict(doc.get("symbol", {"kind": "biharmonic"}))
            if sdoc.get("kind") == "tabulated" and base is not None:
                sdoc["tables"] = {e: str(base / p) for e, p in sdoc.get("tables", {}).items()}
            symbol = SymbolSpec.from_dict(sdoc)
            eps_list = [float(e) for e in doc.get("eps", [])]
            if any(not 0 < e < 1 for e in eps_list):
                raise ConfigError("every eps must lie in (0, 1)")
            if eps_floor is not None:
                eps_list = [e for e in eps_list if e >= eps_floor]
            classes = list(doc.get("classes", ["radial"]))
            bad = [c for c in classes if c not in CLASSES]
            if bad:
                raise ConfigError(f"unknown classes {bad}; expected a subset of {CLASSES}")
            if "Gk" in classes and params.k is None:
                raise ConfigError("class Gk needs params.k")
            run_seed = int(doc.get("seed", 0) if seed is None else seed)
            sol = dict(doc.get("solver", {}))
            sol["seed"] = run_seed
            solver = SolveConfig.from_dict(sol)
            diag = {"concentration": True, "roughness_t": 1, "delta": "default"}
            diag.update(doc.get("diagnostics", {}))
            if diag["roughness_t"] not in (1, 2):
                raise ConfigError("diagnostics.roughness_t must be 1 or 2")
            if diag["delta"] != "default" and not 0 < float(diag["delta"]) < 1:
                raise ConfigError("diagnostics.delta must be 'default' or lie in (0, 1)")
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(params=params, symbol=symbol, eps_list=eps_list, classes=classes,
                   solver=solver, diagnostics=diag, admissibility=dict(doc.get("admissibility", {})),
                   trial=dict(doc.get("trial", {})), interp=dict(doc.get("interp", {})),
                   diagnose=dict(doc.get("diagnose", {})), seed=run_seed, raw=doc)

    def require_eps(self):
        if not self.eps_list:
            raise ConfigError("no eps values left (check eps and --eps-floor)")

    def echo(self) -> dict:
        return {
            "params": self.params.to_dict(), "symbol": self.symbol.to_dict(),
            "eps": self.eps_list, "classes": self.classes, "solver": self.solver.to_dict(),
            "diagnostics": self.diagnostics, "admissibility": self.admissibility,
            "trial": self.trial, "interp": self.interp, "diagnose": self.diagnose, "seed": self.seed,
        }


# --------------------------------------------------------------------------- output


class Output:
    """Collects emitted files and per-task status for the manifest."""

    def __init__(self, root: Path, command: str, config: RunConfig | None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.command, self.config = command, config
        self.files, self.tasks = [], []

    def path(self, name: str) -> Path:
        p = self.root / name
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def add(self, path):
        self.files.append(Path(path))

    def json(self, name: str, doc) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        self.add(p)
        return p

    def csv(self, name: str, rows: list[dict]) -> Path:
        from .fields.io import write_csv

        p = self.path(name)
        cols = {k: [r[k] for r in rows] for k in rows[0]} if rows else {}
        write_csv(p, cols)
        self.add(p)
        return p

    def task(self, name: str, status: str, wall: float, detail: str = ""):
        self.tasks.append({"task": name, "status": status, "wall_time": wall, "detail": detail})

    def manifest(self, exit_code: int) -> Path:
        from . import __version__
        from .fields.io import sha256_file

        doc = {
            "command": self.command, "version": __version__, "exit_code": exit_code,
            "config": self.config.echo() if self.config else None, "tasks": self.tasks,
            "files": [{"path": str(f.relative_to(self.root)), "sha256": sha256_file(f)}
                      for f in sorted(set(self.files))],
        }
        p = self.root / "manifest.json"
        p.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        return p


def _jsonable(x):
    import math

    import numpy as np

    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _tag(cls: str, eps: float) -> str:
    # no dots, so Path.with_suffix cannot eat part of the eps
    return f"{cls}_eps{eps:.6e}".replace(".", "p")


def _save_result(out: Output, res, stem: str) -> Path:
    from .fields.io import save_field, sha256_file

    field_stem = out.path(f"fields/{stem}")
    save_field(res.minimizer, field_stem)
    fj, fc = field_stem.with_suffix(".json"), field_stem.with_suffix(".csv")
    out.add(fj)
    out.add(fc)
    doc = res.to_dict()
    doc["field"] = {"json": f"fields/{fj.name}", "json_sha256": sha256_file(fj)}
    return out.json(f"results/{stem}.json", doc)


# --------------------------------------------------------------------------- commands


def cmd_symbol_check(cfg: RunConfig, out: Output) -> int:
    from .exponents import check_admissibility

    adm = cfg.admissibility
    s = float(adm.get("s", cfg.params.s))
    gamma = float(adm.get("gamma", cfg.params.gamma))
    eps = [float(e) for e in adm.get("eps", cfg.eps_list or [1e-1, 1e-2, 1e-3, 1e-4])]
    t0 = time.perf_counter()
    rep = check_admissibility(cfg.symbol, s, gamma, eps)
    out.json("admissibility.json", rep.to_dict())
    out.task("symbol-check", "pass" if rep.passed else "fail", time.perf_counter() - t0,
             ", ".join(rep.failed_bounds))
    return EXIT_OK if rep.passed else EXIT_CHECK


def cmd_solve(cfg: RunConfig, out: Output) -> int:
    from .minimize import solve_ground_state

    cfg.require_eps()
    rows = []
    for cls in cfg.classes:
        for eps in cfg.eps_list:
            t0 = time.perf_counter()
            res = solve_ground_state(cfg.params, eps, cls, cfg.solver, cfg.symbol)
            _save_result(out, res, _tag(cls, eps))
            rows.append({"cls": cls, "eps": eps, "rayleigh": res.rayleigh, "converged": res.converged,
                         "iterations": res.iterations, "el_residual": res.el_residual,
                         "monotone": res.monotone})
            out.task(_tag(cls, eps), "converged" if res.converged else "not-converged",
                     time.perf_counter() - t0, res.label)
    out.csv("solve.csv", rows)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Output) -> int:
    from .minimize import sweep

    cfg.require_eps()
    for cls in cfg.classes:
        t0 = time.perf_counter()
        sw = sweep(cfg.params, cfg.eps_list, cls, cfg.solver, cfg.symbol)
        for res in sw.results:
            _save_result(out, res, _tag(cls, res.eps))
        out.csv(f"sweep_{cls}.csv", sw.rows())
        out.json(f"fit_{cls}.json", sw.to_dict())
        out.task(f"sweep_{cls}", "fit" if sw.fit else "fit-refused", time.perf_counter() - t0,
                 sw.fit_error)
    return EXIT_OK


def cmd_chain(cfg: RunConfig, out: Output) -> int:
    from .minimize import verify_chain

    cfg.require_eps()
    for eps in cfg.eps_list:
        t0 = time.perf_counter()
        rep = verify_chain(cfg.params, eps, cfg.solver, cfg.symbol)
        out.json(f"chain_eps{eps:.6e}.json", rep.to_dict())
        out.task(f"chain_eps{eps:.6e}", rep.verdict, time.perf_counter() - t0)
    return EXIT_OK


def load_result(path):
    """Rebuild a result object from a persisted result document.

    Raises
    ------
    IntegrityError
        If the field file or its value table does not match the recorded hashes.
    """
    from .exponents import ProblemParams, SymbolSpec
    from .fields.io import load_field, sha256_file
    from .minimize import SolveConfig, SolveResult, input_hash

    path = Path(path)
    doc = json.loads(path.read_text())
    base = path.parent.parent
    fj = base / doc["field"]["json"]
    if sha256_file(fj) != doc["field"]["json_sha256"]:
        raise IntegrityError(f"{fj} does not match the hash recorded in {path}")
    params = ProblemParams(**doc["params"])
    config = SolveConfig.from_dict(doc["config"])
    if input_hash(params, doc["eps"], doc["cls"], config, doc["symbol"]) != doc["input_hash"]:
        raise IntegrityError(f"{path}: input hash mismatch")
    u = load_field(fj)
    import numpy as np

    symbol = SymbolSpec.biharmonic() if doc["symbol"] == "biharmonic" else None
    return SolveResult(
        minimizer=u, rayleigh=doc["rayleigh"], iterations=doc["iterations"],
        trace=np.asarray(doc["trace"]), converged=doc["converged"], cls=doc["cls"], eps=doc["eps"],
        params=params, el_residual=doc["el_residual"], monotone=doc["monotone"],
        cauchy=doc["cauchy"], start=doc["start"], starts=doc["starts"],
        tail_fraction=doc["tail_fraction"], symbol=doc["symbol"], config=config, wall_time=0.0,
        label=doc.get("label", ""), symbol_spec=symbol,
    )


def cmd_diagnose(cfg: RunConfig, out: Output, results=()) -> int:
    from .diagnostics import concentration_report, roughness_report

    paths = list(results) or list(cfg.diagnose.get("results", []))
    if not paths:
        raise ConfigError("diagnose needs result files (positional or [diagnose] results)")
    delta = None if cfg.diagnostics["delta"] == "default" else float(cfg.diagnostics["delta"])
    t = int(cfg.diagnostics["roughness_t"])
    loaded = [load_result(p) for p in paths]
    rows = []
    for p, res in zip(paths, loaded):
        t0 = time.perf_counter()
        stem = _tag(res.cls, res.eps)
        row = {"cls": res.cls, "eps": res.eps}
        doc = {"source": str(p)}
        if cfg.diagnostics.get("concentration", True) and res.cls != "radial":
            conc = concentration_report(res, delta, cfg.symbol if res.symbol_spec is None else None)
            doc["concentration"] = conc.to_dict()
            row.update(lp_ratio=conc.lp_ratio, q_ratio=conc.q_ratio, M_eps=conc.M_eps_estimate)
        rough = roughness_report(res, t, delta)
        doc["roughness"] = rough.to_dict()
        row["sup_ratio"] = rough.sup_ratio
        out.json(f"diagnose/{stem}.json", doc)
        out.csv(f"diagnose/{stem}_roughness.csv",
                [{"radius": r, "ratio": q} for r, q in zip(rough.radii, rough.ratios)])
        out.task(f"diagnose_{stem}", "done", time.perf_counter() - t0)
        rows.append(row)
    keys = sorted({k for r in rows for k in r})
    rows = [{k: r.get(k, "") for k in keys} for r in rows]
    out.csv("diagnose/summary.csv", rows)
    growth = {}
    for cls in sorted({r["cls"] for r in rows}):
        sel = sorted((r for r in rows if r["cls"] == cls), key=lambda r: -r["eps"])
        if len(sel) >= 2:
            growth[cls] = {"eps_max": sel[0]["eps"], "eps_min": sel[-1]["eps"],
                           "growth_factor": sel[-1]["sup_ratio"] / sel[0]["sup_ratio"]}
    out.json("diagnose/growth.json", growth)
    return EXIT_OK


def cmd_trial(cfg: RunConfig, out: Output) -> int:
    from .trial import TrialSpec, lemma_lp_lower_check, trial_upper_bound

    cfg.require_eps()
    kind = cfg.trial.get("kind", "auto")
    cal = float(cfg.trial.get("calibration_eps", max(cfg.eps_list)))
    rows, ok = [], True
    for cls in cfg.classes:
        for eps in cfg.eps_list:
            tb = trial_upper_bound(cfg.params, eps, cls, cfg.symbol, grid_config=cfg.solver.grid,
                                   phys=cfg.solver.phys)
            rows.append({"cls": cls, **tb.to_dict()})
    out.csv("trial_bounds.csv", rows)
    kinds = ["knapp" if cfg.params.k else "radial", "radial"] if kind == "auto" else [kind]
    checks = []
    for kd in dict.fromkeys(kinds):
        spec = TrialSpec(kd)
        constant = None
        for eps in sorted(cfg.eps_list, reverse=True):
            chk = lemma_lp_lower_check(cfg.params, eps, spec, calibration_eps=cal, constant=constant,
                                       grid_config=cfg.solver.grid, phys=cfg.solver.phys)
            constant = chk.constant
            ok &= chk.passed
            checks.append({"kind": kd, **chk.to_dict(),
                           "log_factor": "" if chk.log_factor is None else chk.log_factor})
    out.csv("lemma_checks.csv", checks)
    out.task("trial", "pass" if ok else "fail", 0.0)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_interp_check(cfg: RunConfig, out: Output) -> int:
    from .diagnostics import interpolation_corpus, layer_cake_bound

    n = int(cfg.interp.get("n", 100))
    seed = int(cfg.interp.get("seed", cfg.seed))
    d = int(cfg.interp.get("d", 2))
    q = float(cfg.interp.get("q", 4.0))
    r = float(cfg.interp.get("r", 3.0))
    t0 = time.perf_counter()
    reps = [layer_cake_bound(s, d, r, q) for s in interpolation_corpus(n, seed, d, q, r)]
    out.csv("interp_corpus.csv", [{"index": i, **rep.to_dict()} for i, rep in enumerate(reps)])
    K_obs = max(rep.ratio for rep in reps)
    K = reps[0].K_explicit
    cake_ok = all(rep.layer_cake_rel_error < 0.01 for rep in reps)
    ratios = [rep.C1 / rep.C2 for rep in reps]
    verdict = {
        "n": n, "seed": seed, "K_explicit": K, "K_observed": K_obs, "single_K_pass": K_obs <= K,
        "layer_cake_pass": cake_ok, "C1_over_C2_min": min(ratios), "C1_over_C2_max": max(ratios),
    }
    out.json("interp_verdict.json", verdict)
    passed = K_obs <= K and cake_ok
    out.task("interp-check", "pass" if passed else "fail", time.perf_counter() - t0)
    return EXIT_OK if passed else EXIT_CHECK


HANDLERS = {
    "symbol-check": cmd_symbol_check, "solve": cmd_solve, "sweep": cmd_sweep, "chain": cmd_chain,
    "diagnose": cmd_diagnose, "trial": cmd_trial, "interp-check": cmd_interp_check,
}


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdnls", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "interp-check", help="TOML run configuration")
        sp.add_argument("--out", default="pdnls-out", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--threads", type=int, default=None, help="BLAS/OpenMP thread count")
        sp.add_argument("--eps-floor", type=float, default=None, help="drop eps below this value")
        if name == "diagnose":
            sp.add_argument("results", nargs="*", help="persisted result JSON files")
    return ap


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = None
    try:
        _set_threads(args.threads)
        if args.config:
            path = Path(args.config)
            cfg = RunConfig.from_dict(_load_toml(path), args.seed, args.eps_floor, base=path.parent)
        else:
            cfg = RunConfig.from_dict({"params": {"d": 2, "p": 3}}, args.seed, args.eps_floor)
        out = Output(Path(args.out), args.command, cfg)
        handler = HANDLERS[args.command]
        if args.command == "diagnose":
            code = handler(cfg, out, args.results)
        else:
            code = handler(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        code = EXIT_INTEGRITY
    except (ParameterError, ResolutionError, ExtrapolationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except (AccuracyError, QuadratureError) as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        code = EXIT_CHECK
    if out is not None:
        out.manifest(code)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
