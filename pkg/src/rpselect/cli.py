"""Command-line front end: ``rpselect {fit,select,compare-nested,simulate,hald-demo}``."""
from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, ModelSpec
from .criterion import Criterion, score
from .estimator import fit_mrpe
from .exceptions import ConfigError, InvalidInputError, NoValidModelError, RpSelectError
from .hald import NAMES as HALD_NAMES, all_subsets, load_hald
from .io import ingest_csv
from .restricted import ZeroConstraints, compare_nested
from .simlab import DEFAULT_ALPHAS, StudyConfig, run_study

SEED_ENV = "RPSELECT_SEED"
HALD_ALPHAS = (0.01, 0.02, 0.04, 0.05, 0.07, 0.1, 0.2, 0.4, 0.5, 0.7)


@dataclass
class CliConfig:
    command: str
    alpha_list: tuple = ()
    models: Optional[list] = None
    min_size: int = 1
    criteria: tuple = ()
    output_path: Optional[str] = None


@dataclass
class SelectReport:
    """Scores of every candidate under every criterion, plus the winners."""

    labels: list
    criteria: list
    totals: np.ndarray  # (n_models, n_criteria), NaN where the fit was excluded
    best: list

    def to_text(self) -> str:
        heads = [c.label for c in self.criteria]
        w = max([len("Best model")] + [len(s) for s in self.labels]) + 2
        cw = max([10] + [len(h) + 2 for h in heads] + [len(b) + 2 for b in self.best])
        out = io.StringIO()
        out.write("Model".ljust(w) + "".join(h.rjust(cw) for h in heads) + "\n")
        for label, row in zip(self.labels, self.totals):
            cells = ["--" if np.isnan(v) else f"{v:.4f}" for v in row]
            out.write(label.ljust(w) + "".join(c.rjust(cw) for c in cells) + "\n")
        out.write("Best model".ljust(w) + "".join(b.rjust(cw) for b in self.best) + "\n")
        return out.getvalue()

    def to_delimited(self, delimiter: str = ",") -> str:
        out = io.StringIO()
        out.write(delimiter.join(["model"] + [c.label for c in self.criteria]) + "\n")
        for label, row in zip(self.labels, self.totals):
            out.write(delimiter.join([label] + ["" if np.isnan(v) else repr(float(v)) for v in row]) + "\n")
        out.write(delimiter.join(["best"] + self.best) + "\n")
        return out.getvalue()


def _resolve_models(spec: Optional[str], names: Sequence[str], min_size: int) -> list:
    """``None`` means all subsets; otherwise ``"X1,X2;X1,X3"`` by column name."""
    if spec is None:
        models = all_subsets(len(names), min_size=min_size)
        return [ModelSpec(m.columns, name=_label(m.columns, names)) for m in models]
    models = []
    for part in spec.split(";"):
        cols = [c.strip() for c in part.split(",") if c.strip()]
        unknown = [c for c in cols if c not in names]
        if unknown:
            raise InvalidInputError(f"unknown predictor(s) {unknown}; available {list(names)}")
        idx = tuple(names.index(c) for c in cols)
        models.append(ModelSpec(idx, name=_label(idx, names)))
    if not models:
        raise InvalidInputError("no candidate models given")
    return models


def _label(cols, names) -> str:
    return "(" + ",".join(names[c] for c in cols) + ")"


def run_select_command(data: Dataset, names: Sequence[str], config: CliConfig) -> SelectReport:
    models = _resolve_models(config.models and ";".join(config.models), names, config.min_size)
    criteria = [Criterion("rp_nh", a) for a in config.alpha_list] + list(config.criteria)
    if not criteria:
        raise ConfigError("no criteria requested")
    totals = np.full((len(models), len(criteria)), np.nan)
    best = []
    for j, crit in enumerate(criteria):
        valid = []
        for i, model in enumerate(models):
            try:
                cv = score(data, model, crit)
            except RpSelectError as exc:
                logging.getLogger(__name__).warning("skipping %s under %s: %s",
                                                    model.label, crit.label, exc)
                continue
            if cv.converged and np.isfinite(cv.total):
                totals[i, j] = cv.total
                valid.append((cv.total, model.n_params, i))
            else:
                logging.getLogger(__name__).warning("excluding unconverged fit %s under %s",
                                                    model.label, crit.label)
        if not valid:
            raise NoValidModelError(f"no candidate could be scored under {crit.label}")
        best.append(models[min(valid)[2]].label)
    return SelectReport([m.label for m in models], criteria, totals, best)


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text)


def _alphas(text: Optional[str]):
    if text is None:
        return None
    try:
        vals = tuple(float(a) for a in text.split(",") if a.strip())
    except ValueError:
        raise ConfigError(f"cannot parse alpha list {text!r}") from None
    if any(not (a >= 0) for a in vals):
        raise ConfigError("alpha values must be >= 0")
    return vals


def _criteria(text: Optional[str]):
    if not text:
        return ()
    return tuple(Criterion.parse(c) for c in text.split(",") if c.strip())


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rpselect",
        description="Robust model selection for linear regression with the RP_NH criterion.")
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp):
        sp.add_argument("input", help="delimited text file (comma or tab) with a header row")
        sp.add_argument("--response", help="response column name (default: last column)")

    fit = sub.add_parser("fit", help="fit the MRPE on one model")
    data_args(fit)
    fit.add_argument("--alpha", type=float, default=0.5, help="tuning parameter (default 0.5)")
    fit.add_argument("--columns", help="comma-separated predictors (default: all)")
    fit.add_argument("--no-intercept", action="store_true")
    fit.add_argument("--out", help="write estimates here")

    def select_args(sp, alpha_default, min_size_default):
        sp.add_argument("--alpha", help=f"comma-separated alphas (default {alpha_default})")
        sp.add_argument("--criteria", help="extra criteria: AIC,BIC,AICC")
        sp.add_argument("--models", help='candidate models, e.g. "X1,X2;X1,X3" (default: all subsets)')
        sp.add_argument("--min-size", type=int, default=min_size_default,
                        help=f"smallest subset size for all-subsets (default {min_size_default})")
        sp.add_argument("--out", help="write full-precision results here")

    sel = sub.add_parser("select", help="score candidate models and pick the best")
    data_args(sel)
    select_args(sel, "0.5", 1)

    nest = sub.add_parser("compare-nested", help="compare a full model with a nested one")
    data_args(nest)
    nest.add_argument("--full", required=True, help="comma-separated predictors of the full model")
    nest.add_argument("--drop", required=True, help="comma-separated predictors set to zero")
    nest.add_argument("--alpha", type=float, default=0.5)
    nest.add_argument("--out")

    sim = sub.add_parser("simulate", help="run the polynomial selection study")
    sim.add_argument("--config", help="JSON file with StudyConfig fields (flags override it)")
    sim.add_argument("--replicates", type=int)
    sim.add_argument("--n", type=int)
    sim.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV} or 0)")
    sim.add_argument("--contamination", type=float, help="contaminated proportion in [0, 1)")
    sim.add_argument("--r", type=float, help="contamination strength (default 10)")
    sim.add_argument("--clean", action="store_true", help="no contamination")
    sim.add_argument("--alpha", help="comma-separated alphas for RP_NH")
    sim.add_argument("--criteria", help="classical criteria (default AIC,BIC,AICC)")
    sim.add_argument("--jobs", type=int, help="worker processes (default 1)")
    sim.add_argument("--out", help="write the selection table here")

    demo = sub.add_parser("hald-demo", help="RP_NH on the bundled Hald cement data")
    select_args(demo, ",".join(f"{a:g}" for a in HALD_ALPHAS), 2)
    return p


def _study_config(args) -> StudyConfig:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        if "alphas" in cfg:
            alphas = cfg.pop("alphas")
            cfg["criteria"] = list(cfg.get("criteria", ["AIC", "BIC", "AICC"])) + [
                f"RPNH_{a}" for a in alphas]
        unknown = set(cfg) - set(StudyConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if args.replicates is not None:
        cfg["replicates"] = args.replicates
    if args.n is not None:
        cfg["n"] = args.n
    if args.seed is not None:
        cfg["seed"] = args.seed
    elif "seed" not in cfg:
        cfg["seed"] = _default_seed()
    if args.clean:
        if args.contamination not in (None, 0.0):
            raise ConfigError("--clean conflicts with --contamination")
        cfg["contamination_proportion"] = 0.0
    elif args.contamination is not None:
        cfg["contamination_proportion"] = args.contamination
    if args.r is not None:
        cfg["contamination_r"] = args.r
    if args.jobs is not None:
        cfg["n_jobs"] = args.jobs
    if args.alpha is not None or args.criteria is not None:
        classical = _criteria(args.criteria) if args.criteria is not None else _criteria("AIC,BIC,AICC")
        alphas = _alphas(args.alpha) if args.alpha is not None else DEFAULT_ALPHAS
        cfg["criteria"] = classical + tuple(Criterion("rp_nh", a) for a in alphas)
    if cfg.get("replicates", 1) < 1:
        raise ConfigError("replicates must be >= 1; an empty study has no table")
    try:
        return StudyConfig(**cfg)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_fit(args, out):
    data, names, _ = ingest_csv(args.input, args.response)
    cols = names if args.columns is None else [c.strip() for c in args.columns.split(",")]
    unknown = [c for c in cols if c not in names]
    if unknown:
        raise InvalidInputError(f"unknown predictor(s) {unknown}")
    model = ModelSpec(tuple(names.index(c) for c in cols), include_intercept=not args.no_intercept)
    res = fit_mrpe(data.subset(model), args.alpha)
    coef = (["(Intercept)"] if model.include_intercept else []) + cols
    lines = [f"alpha={args.alpha:g} converged={res.converged} iterations={res.iterations}"]
    lines += [f"{nm}\t{b:.6f}" for nm, b in zip(coef, res.theta.beta)]
    lines.append(f"sigma\t{res.theta.sigma:.6f}")
    lines.append(f"objective\t{res.objective:.6f}")
    out.write("\n".join(lines) + "\n")
    _write(args.out, "parameter,estimate\n" + "".join(
        f"{nm},{float(b)!r}\n" for nm, b in zip(coef + ["sigma"], res.theta.vector)))


def _select_config(args, command, alpha_default) -> CliConfig:
    alphas = _alphas(args.alpha)
    return CliConfig(command=command, alpha_list=alpha_default if alphas is None else alphas,
                     models=None if args.models is None else [args.models],
                     min_size=args.min_size, criteria=_criteria(args.criteria),
                     output_path=args.out)


def _cmd_select(args, out):
    data, names, _ = ingest_csv(args.input, args.response)
    config = _select_config(args, "select", (0.5,))
    report = run_select_command(data, names, config)
    out.write(report.to_text())
    _write(config.output_path, report.to_delimited())


def _cmd_hald(args, out):
    config = _select_config(args, "hald-demo", HALD_ALPHAS)
    report = run_select_command(load_hald(), list(HALD_NAMES), config)
    out.write("Hald cement data, n=13\n")
    out.write(report.to_text())
    _write(config.output_path, report.to_delimited())


def _cmd_nested(args, out):
    data, names, _ = ingest_csv(args.input, args.response)
    full_cols = [c.strip() for c in args.full.split(",")]
    drop = [c.strip() for c in args.drop.split(",")]
    bad = [c for c in full_cols + drop if c not in names] + [c for c in drop if c not in full_cols]
    if bad:
        raise InvalidInputError(f"invalid predictor(s) {bad}")
    full = ModelSpec(tuple(names.index(c) for c in full_cols))
    # intercept is coefficient 0 of the full design
    cons = ZeroConstraints(tuple(1 + full_cols.index(c) for c in drop), full.n_params)
    rep = compare_nested(data, full, cons, args.alpha)
    text = (f"alpha={args.alpha:g} r={cons.r}\n"
            f"RP_NH full\t{rep.rp_nh_full:.4f}\n"
            f"RP_NH restricted\t{rep.rp_nh_restricted:.4f}\n"
            f"L\t{rep.statistic_L:.4f}\n"
            f"eigenvalue\t{rep.eigenvalues[0]:.4f}\n"
            f"P(select restricted)\t{rep.prob_select_restricted:.4f}\n"
            f"selected\t{'restricted' if rep.restricted_selected else 'full'}\n")
    out.write(text)
    _write(args.out, "quantity,value\n" + "".join(f"{k},{v!r}\n" for k, v in [
        ("rp_nh_full", rep.rp_nh_full), ("rp_nh_restricted", rep.rp_nh_restricted),
        ("statistic_L", rep.statistic_L), ("eigenvalue", float(rep.eigenvalues[0])),
        ("prob_select_restricted", rep.prob_select_restricted)]))


def _cmd_simulate(args, out):
    config = _study_config(args)
    out.write(f"# {config.describe()}\n")
    table = run_study(config)
    out.write(table.to_text())
    _write(args.out, f"# {config.describe()}\n" + table.to_text(","))


_COMMANDS = {"fit": _cmd_fit, "select": _cmd_select, "compare-nested": _cmd_nested,
             "simulate": _cmd_simulate, "hald-demo": _cmd_hald}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args, out)
    except RpSelectError as exc:
        print(f"rpselect: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
