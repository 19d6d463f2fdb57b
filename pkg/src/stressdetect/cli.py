"""Command-line entry point: synth, featurize, run, train, eval, explain, compare.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Errors are reported on stderr as one JSON object ``{"error": {...}}``.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import os
import shutil
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .dataset import SplitDataset, participant_split, upsample_stress
from .evaluation import (
    DEFAULT_SCENARIOS,
    Scenario,
    evaluate,
    five_by_two_ttest,
    kfold_cv,
)
from .explain import dependence_csv, shap_dependence, shap_summary
from .features import FeatureTable
from .ingest import load_cohort, write_participant
from .models import FAMILIES, TREE_FAMILIES, ModelSpec, load_model, save_model, train
from .models.grid import grid_search
from .pipeline import WindowParams, records_to_windows
from .features import featurize_windows
from .svg import beeswarm_svg, roc_svg, scatter_svg
from .synth import CohortConfig, generate_cohort

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
REPORT_DIR_ENV = "STRESSDETECT_REPORT_DIR"
HELP_WIDTH = 100


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = EXIT_RUNTIME):
        super().__init__(message)
        self.code, self.message, self.exit_code = code, message, exit_code


def _report_error(code: str, message: str, exit_code: int) -> int:
    err = {"error": {"code": code, "message": message, "exit_code": exit_code}}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return exit_code


# ---------------------------------------------------------------- schemas


def load_schema(name: str) -> dict:
    text = resources.files("stressdetect").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(name: str, document) -> None:
    jsonschema.validate(document, load_schema(name))


def dumps(document) -> str:
    return json.dumps(document, indent=2) + "\n"


def write_json(path: Path, document, schema: str | None = None) -> None:
    if schema is not None:
        validate(schema, document)
    path.write_text(dumps(document), encoding="utf-8")


# ---------------------------------------------------------------- run config


def _default_models() -> list[dict]:
    return [{"family": f, "hyperparameters": {}} for f in FAMILIES]


@dataclass
class RunConfig:
    cohort_dir: str | None = None
    features_csv: str | None = None
    synth: dict | None = None
    window: dict = field(default_factory=lambda: {"half_width": 30, "length": 60, "min_coverage": 0.8})
    train_fraction: float = 0.8
    upsample_ratio: list | None = field(default_factory=lambda: [10, 7])
    models: list = field(default_factory=_default_models)
    explain_family: str = "gbt"
    grid: dict | None = None
    scenarios: list = field(default_factory=lambda: [s.name for s in DEFAULT_SCENARIOS])
    cv: dict = field(default_factory=lambda: {"k": 10, "grouping": "participant"})
    top_features: int = 3
    report_dir: str = "report"
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        try:
            validate("run_config", d)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise CliError("config_invalid", f"{where}: {exc.message}", EXIT_USAGE) from None
        cfg = cls(**{k: v for k, v in d.items() if k != "window" and k != "cv"})
        cfg.window = {**cls().window, **d.get("window", {})}
        cfg.cv = {**cls().cv, **d.get("cv", {})}
        cfg.check()
        return cfg

    @classmethod
    def read(cls, path: str | Path) -> "RunConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError("config_unreadable", str(exc), EXIT_USAGE) from None
        except json.JSONDecodeError as exc:
            raise CliError("config_invalid", f"not valid JSON: {exc}", EXIT_USAGE) from None
        return cls.from_dict(d)

    def check(self) -> None:
        sources = [s for s in (self.cohort_dir, self.features_csv, self.synth) if s is not None]
        if len(sources) != 1:
            raise CliError(
                "config_invalid", "exactly one of cohort_dir, features_csv, synth must be set", EXIT_USAGE
            )
        families = [m["family"] for m in self.models]
        if len(set(families)) != len(families):
            raise CliError("config_invalid", "models: each family may appear once", EXIT_USAGE)
        if self.explain_family not in families or self.explain_family not in TREE_FAMILIES:
            raise CliError(
                "config_invalid",
                f"explain_family must be a tree family listed in models, got {self.explain_family!r}",
                EXIT_USAGE,
            )
        try:
            for m in self.models:
                self.spec(m["family"]).resolved()
            for s in self.scenarios:
                Scenario.parse(s)
            if self.synth is not None:
                self.cohort_config()
        except ValueError as exc:
            raise CliError("config_invalid", str(exc), EXIT_USAGE) from None

    def spec(self, family: str) -> ModelSpec:
        hp = next((m.get("hyperparameters", {}) for m in self.models if m["family"] == family), {})
        return ModelSpec(family, dict(hp), self.seed)

    def cohort_config(self) -> CohortConfig:
        return CohortConfig.from_dict({"seed": self.seed, **(self.synth or {})})

    @property
    def ratio(self) -> tuple[int, int] | None:
        return tuple(self.upsample_ratio) if self.upsample_ratio else None

    def window_params(self) -> WindowParams:
        w = self.window
        return WindowParams(w["half_width"], w["length"], w["min_coverage"])

    def to_dict(self) -> dict:
        out = {
            "cohort_dir": self.cohort_dir,
            "features_csv": self.features_csv,
            "synth": self.synth,
            "window": dict(self.window),
            "train_fraction": self.train_fraction,
            "upsample_ratio": self.upsample_ratio,
            "models": self.models,
            "explain_family": self.explain_family,
            "grid": self.grid,
            "scenarios": list(self.scenarios),
            "cv": dict(self.cv),
            "top_features": self.top_features,
            "report_dir": self.report_dir,
            "seed": self.seed,
        }
        return {k: v for k, v in out.items() if v is not None or k == "upsample_ratio"}


# ---------------------------------------------------------------- stages


@dataclass
class LoadedData:
    table: FeatureTable
    info: dict
    windows: list = field(default_factory=list)


def load_rows(cfg: RunConfig, keep_windows: bool = False) -> LoadedData:
    if cfg.features_csv is not None:
        table = FeatureTable.read(cfg.features_csv)
        return LoadedData(table, {"source": "features_csv", "rows": len(table)})
    if cfg.cohort_dir is not None:
        loaded = load_cohort(cfg.cohort_dir)
        records, info = loaded.records, {"source": "cohort_dir", "rejected_rows": len(loaded.rejects)}
    else:
        records = generate_cohort(cfg.cohort_config())
        info = {"source": "synth", "cohort": cfg.cohort_config().to_dict()}
    windows, summary = records_to_windows(records, cfg.window_params())
    table = featurize_windows(windows)
    info.update(participants=len(records), rows=len(table), windowing=summary.as_dict())
    return LoadedData(table, info, windows if keep_windows else [])


def _cv_folds(cfg: RunConfig, split: SplitDataset) -> int:
    if cfg.cv["grouping"] == "participant":
        return min(cfg.cv["k"], len(split.train_participants))
    return min(cfg.cv["k"], len(split.train))


def _roc_rows(name: str, roc) -> list[str]:
    return [f"{name},{f!r},{t!r},{h!r}" for f, t, h in roc.points()]


def _scenario_doc(family: str, report) -> dict:
    return {"family": family, "scenarios": report.scenario_matrices}


def _explain_outputs(model, rows: FeatureTable, top_k: int, out: Path) -> list[str]:
    summary = shap_summary(model, rows.X)
    (out / "shap_summary.csv").write_text(summary.summary_csv(), encoding="utf-8")
    (out / "shap_values.csv").write_text(summary.shap_csv(), encoding="utf-8")
    svg = beeswarm_svg(summary.feature_names, summary.shap, summary.X, summary.ranking)
    (out / "shap_summary.svg").write_text(svg, encoding="utf-8")
    top = summary.top(top_k)
    for name in top:
        pairs = shap_dependence(name, summary)
        (out / f"shap_dependence_{name}.csv").write_text(dependence_csv(name, pairs), encoding="utf-8")
        (out / f"shap_dependence_{name}.svg").write_text(scatter_svg(name, pairs), encoding="utf-8")
    return top


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _file_list(root: Path) -> list[dict]:
    files = sorted(p for p in root.rglob("*") if p.is_file() and p.name != "manifest.json")
    return [{"path": p.relative_to(root).as_posix(), "sha256": _sha256(p), "bytes": p.stat().st_size} for p in files]


def _warning_list(caught) -> list[str]:
    return sorted({f"{w.category.__name__}: {w.message}" for w in caught})


@contextlib.contextmanager
def bundle_dir(target: Path):
    """Write into a sibling temp directory, then swap it into place.

    On any exception the temp directory is deleted, so no partial bundle is
    left behind. An existing target is only replaced if it holds a bundle.
    """
    target = target.resolve()
    if target.exists() and any(target.iterdir()) and not (target / "manifest.json").exists():
        raise CliError(
            "report_dir_occupied", f"{target} exists, is not empty and holds no report bundle", EXIT_USAGE
        )
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if target.exists():
        shutil.rmtree(target)
    tmp.rename(target)


def execute_run(cfg: RunConfig, out: Path, keep_windows: bool = False) -> tuple[dict, list]:
    """Write every bundle file into ``out``; returns (manifest, windows)."""
    given = cfg.to_dict()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        data = load_rows(cfg, keep_windows)
        data.table.write(out / "features.csv")
        split = participant_split(data.table, cfg.train_fraction, cfg.seed)
        fit = upsample_stress(split.train, cfg.ratio, cfg.seed) if cfg.ratio else split.train
        write_json(out / "split.json", split.manifest(), "split")

        if cfg.grid is not None:
            result = grid_search(
                cfg.grid["family"],
                cfg.grid["values"],
                split,
                cfg.grid.get("objective", "test_accuracy"),
                cfg.seed,
                cfg.spec(cfg.grid["family"]).hyperparameters,
                cfg.ratio,
            )
            write_json(out / "grid.json", result.to_dict(), "grid")
            if result.best is not None:
                cfg.models = [
                    {"family": m["family"], "hyperparameters": result.best.hyperparameters}
                    if m["family"] == cfg.grid["family"]
                    else m
                    for m in cfg.models
                ]

        scenarios = [Scenario.parse(s) for s in cfg.scenarios]
        k = _cv_folds(cfg, split)
        metric_rows, scenario_rows, roc_lines, curves = [], [], ["model,fpr,tpr,threshold"], []
        (out / "models").mkdir()
        models = {}
        for m in cfg.models:
            spec = cfg.spec(m["family"])
            model = train(spec, fit.X, fit.y)
            models[spec.family] = model
            save_model(model, out / "models" / f"{spec.family}.json")
            cv = (
                kfold_cv(spec, split.train, k, cfg.cv["grouping"], cfg.seed, cfg.ratio)
                if k >= 2
                else None
            )
            report = evaluate(model, split.train, split.test, scenarios, cv)
            metric_rows.append({"family": spec.family, "hyperparameters": model.hyperparameters, **report.metrics()})
            scenario_rows.append(_scenario_doc(spec.family, report))
            roc_lines += _roc_rows(spec.family, report.roc)
            curves.append((spec.family, report.roc.fpr, report.roc.tpr, report.auc))

        write_json(out / "metrics.json", {"cv_folds": k, "cv_grouping": cfg.cv["grouping"], "models": metric_rows}, "metrics")
        write_json(out / "scenarios.json", {"models": scenario_rows}, "scenarios")
        (out / "roc.csv").write_text("\n".join(roc_lines) + "\n", encoding="utf-8")
        (out / "roc.svg").write_text(roc_svg(curves), encoding="utf-8")
        top = _explain_outputs(models[cfg.explain_family], split.test, cfg.top_features, out)

    manifest = {
        "tool": "stressdetect",
        "version": __version__,
        "numpy": np.__version__,
        "seeds": {
            "master": cfg.seed,
            "cohort": cfg.cohort_config().seed if cfg.synth is not None else None,
            "split": cfg.seed,
            "upsample": cfg.seed,
            "models": cfg.seed,
            "cv": cfg.seed,
        },
        "config": given,
        "data": data.info,
        "explained_model": cfg.explain_family,
        "top_features": top,
        "warnings": _warning_list(caught),
        "files": _file_list(out),
    }
    write_json(out / "manifest.json", manifest, "manifest")
    return manifest, data.windows


# ---------------------------------------------------------------- commands


def _resolve_report_dir(flag: str | None, cfg: RunConfig) -> Path:
    return Path(flag or os.environ.get(REPORT_DIR_ENV) or cfg.report_dir)


def _config_from_args(args) -> RunConfig:
    if args.synth_default and args.config:
        raise CliError("usage", "--config and --synth-default are mutually exclusive", EXIT_USAGE)
    if args.synth_default:
        return RunConfig(synth={})
    if not args.config:
        raise CliError("usage", "one of --config or --synth-default is required", EXIT_USAGE)
    return RunConfig.read(args.config)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    if args.seed is not None:
        cfg.seed = args.seed
    target = _resolve_report_dir(args.report_dir, cfg)
    with bundle_dir(target) as tmp:
        manifest, windows = execute_run(cfg, tmp, keep_windows=bool(args.dump_windows))
    if args.dump_windows:  # written only once the bundle is complete
        Path(args.dump_windows).write_text("".join(w.to_json() + "\n" for w in windows), encoding="utf-8")
    print(json.dumps({"report_dir": str(target), "files": len(manifest["files"]) + 1, "top_features": manifest["top_features"]}))
    return EXIT_OK


def cmd_synth(args) -> int:
    base = CohortConfig.read(args.config).to_dict() if args.config else {}
    for key, value in (("seed", args.seed), ("n_participants", args.participants)):
        if value is not None:
            base[key] = value
    if args.hours is not None:
        base["days"] = args.hours / 24.0
    try:
        config = CohortConfig.from_dict(base)
    except (ValueError, TypeError) as exc:
        raise CliError("config_invalid", str(exc), EXIT_USAGE) from None
    target = Path(args.out)
    with bundle_dir(target) as tmp:
        for record in generate_cohort(config):
            write_participant(record, tmp)
        write_json(tmp / "cohort.json", config.to_dict(), "cohort_config")
        manifest = {"tool": "stressdetect", "version": __version__, "files": _file_list(tmp)}
        write_json(tmp / "manifest.json", manifest, "manifest")
    print(json.dumps({"out": str(target), "participants": config.n_participants}))
    return EXIT_OK


def cmd_featurize(args) -> int:
    loaded = load_cohort(args.cohort)
    params = WindowParams(args.half_width, args.length, args.min_coverage)
    windows, summary = records_to_windows(loaded.records, params)
    table = featurize_windows(windows)
    table.write(args.out)
    if args.dump_windows:
        Path(args.dump_windows).write_text("".join(w.to_json() + "\n" for w in windows), encoding="utf-8")
    print(json.dumps({"rows": len(table), "rejected_rows": len(loaded.rejects), **summary.as_dict()}, sort_keys=True))
    return EXIT_OK


def _parse_ratio(text: str) -> tuple[int, int] | None:
    if text == "none":
        return None
    a, sep, b = text.partition(":")
    try:
        ratio = (int(a), int(b))
    except ValueError:
        ratio = None
    if not sep or ratio is None or ratio[0] <= 0 or ratio[1] <= 0:
        raise argparse.ArgumentTypeError(f"expected N:M with positive integers or 'none', got {text!r}")
    return ratio


def _parse_hp(text: str) -> dict:
    try:
        hp = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"hyperparameters must be a JSON object: {exc}") from None
    if not isinstance(hp, dict):
        raise argparse.ArgumentTypeError("hyperparameters must be a JSON object")
    return hp


def _split_from_file(table: FeatureTable, path: str | None) -> tuple[FeatureTable, FeatureTable]:
    if path is None:
        return table, table
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    validate("split", doc)
    ids = table.participant.astype(str)
    return table.subset(np.isin(ids, doc["train_participants"])), table.subset(np.isin(ids, doc["test_participants"]))


def cmd_train(args) -> int:
    table = FeatureTable.read(args.features)
    spec = ModelSpec(args.family, args.hyperparameters, args.seed)
    try:
        spec.resolved()
    except ValueError as exc:
        raise CliError("config_invalid", str(exc), EXIT_USAGE) from None
    split = participant_split(table, args.train_fraction, args.seed)
    fit = upsample_stress(split.train, args.upsample, args.seed) if args.upsample else split.train
    model = train(spec, fit.X, fit.y)
    save_model(model, args.model_out)
    if args.split_out:
        write_json(Path(args.split_out), split.manifest(), "split")
    print(json.dumps({"model": args.model_out, "train_rows": len(fit), "split": split.method}))
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    train_rows, test_rows = _split_from_file(FeatureTable.read(args.features), args.split)
    scenarios = [Scenario.parse(s) for s in args.scenario] if args.scenario else list(DEFAULT_SCENARIOS)
    report = evaluate(model, train_rows, test_rows, scenarios)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    row = {"family": model.family, "hyperparameters": model.hyperparameters, **report.metrics()}
    write_json(out / "metrics.json", {"cv_folds": None, "cv_grouping": None, "models": [row]}, "metrics")
    write_json(out / "scenarios.json", {"models": [_scenario_doc(model.family, report)]}, "scenarios")
    (out / "roc.csv").write_text("\n".join(["model,fpr,tpr,threshold", *_roc_rows(model.family, report.roc)]) + "\n")
    (out / "roc.svg").write_text(roc_svg([(model.family, report.roc.fpr, report.roc.tpr, report.auc)]))
    print(json.dumps(report.metrics()))
    return EXIT_OK


def cmd_explain(args) -> int:
    model = load_model(args.model)
    if model.family not in TREE_FAMILIES:
        raise CliError("unsupported_model", f"explain supports {list(TREE_FAMILIES)}, not {model.family!r}", EXIT_USAGE)
    _, rows = _split_from_file(FeatureTable.read(args.features), args.split)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    top = _explain_outputs(model, rows, args.top_k, out)
    print(json.dumps({"top_features": top}))
    return EXIT_OK


def cmd_compare(args) -> int:
    for fam in (args.family_a, args.family_b):
        if fam not in FAMILIES:
            raise CliError("usage", f"unknown family {fam!r}; expected one of {list(FAMILIES)}", EXIT_USAGE)
    cfg = _config_from_args(args)
    if args.seed is not None:
        cfg.seed = args.seed
    table = load_rows(cfg).table
    spec_a, spec_b = cfg.spec(args.family_a), cfg.spec(args.family_b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = five_by_two_ttest(spec_a, spec_b, table, cfg.seed, cfg.cv["grouping"], cfg.ratio)
    doc = {"family_a": args.family_a, "family_b": args.family_b, "seed": cfg.seed, **result.to_dict()}
    validate("compare", doc)
    if args.out:
        Path(args.out).write_text(dumps(doc), encoding="utf-8")
    else:
        sys.stdout.write(dumps(doc))
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError("usage", f"{self.prog}: {message}", EXIT_USAGE)


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH, max_help_position=36)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="stressdetect",
        description="Stress detection from 1 Hz heart rate and hand acceleration.",
        formatter_class=_formatter,
        epilog=f"Exit codes: 0 ok, 1 runtime failure, 2 usage/config error. "
        f"${REPORT_DIR_ENV} overrides the report directory of 'run'.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}", help="print version and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, description=help_text, formatter_class=_formatter)

    p = add("synth", "Generate a synthetic cohort as per-participant sensor and event CSVs.")
    p.add_argument("--out", required=True, help="output directory for <id>.sensor.csv / <id>.events.csv")
    p.add_argument("--config", help="cohort config JSON (fields of CohortConfig)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--participants", type=int, help="number of participants (overrides the config)")
    p.add_argument("--hours", type=float, help="recording span per participant in hours (overrides the config)")
    p.set_defaults(func=cmd_synth)

    p = add("featurize", "Window a cohort directory and write the feature matrix CSV.")
    p.add_argument("--cohort", required=True, help="directory of <id>.sensor.csv / <id>.events.csv files")
    p.add_argument("--out", required=True, help="feature matrix CSV to write")
    p.add_argument("--half-width", type=int, default=30, help="seconds either side of a stress report (default 30)")
    p.add_argument("--length", type=int, default=60, help="non-stress tile length in seconds (default 60)")
    p.add_argument("--min-coverage", type=float, default=0.8, help="minimum sample fraction per window (default 0.8)")
    p.add_argument("--dump-windows", metavar="PATH", help="also write every retained window as JSONL")
    p.set_defaults(func=cmd_featurize)

    p = add("run", "Run the whole pipeline and write a report bundle.")
    p.add_argument("--config", help="run config JSON; unknown keys are rejected")
    p.add_argument("--synth-default", action="store_true", help="use the default synthetic cohort and settings")
    p.add_argument("--report-dir", help=f"output directory (beats ${REPORT_DIR_ENV} and the config)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--dump-windows", metavar="PATH", help="also write every retained window as JSONL")
    p.set_defaults(func=cmd_run)

    p = add("train", "Split a feature CSV by participant and train one model.")
    p.add_argument("--features", required=True, help="feature matrix CSV")
    p.add_argument("--family", required=True, choices=FAMILIES, help="model family")
    p.add_argument("--hyperparameters", type=_parse_hp, default={}, help="JSON object of hyperparameters")
    p.add_argument("--seed", type=int, default=0, help="seed for split, upsampling and model (default 0)")
    p.add_argument("--train-fraction", type=float, default=0.8, help="target train row fraction (default 0.8)")
    p.add_argument("--upsample", type=_parse_ratio, default=(10, 7), help="non-stress:stress ratio or 'none' (default 10:7)")
    p.add_argument("--model-out", required=True, help="model JSON to write")
    p.add_argument("--split-out", help="split manifest JSON to write")
    p.set_defaults(func=cmd_train)

    p = add("eval", "Score a saved model: accuracies, AUC, ROC and scenario confusion matrices.")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--features", required=True, help="feature matrix CSV")
    p.add_argument("--split", help="split manifest JSON; without it every row is both train and test")
    p.add_argument("--scenario", action="append", help="tpr_at_least:X or fpr_at_most:X (repeatable)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_eval)

    p = add("explain", "TreeSHAP summary and dependence exports for a saved tree model.")
    p.add_argument("--model", required=True, help="model JSON (gbt or random_forest)")
    p.add_argument("--features", required=True, help="feature matrix CSV")
    p.add_argument("--split", help="split manifest JSON; explain only the test participants")
    p.add_argument("--top-k", type=int, default=3, help="dependence exports for the top K features (default 3)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_explain)

    p = add("compare", "5x2-CV paired t-test between two model families.")
    p.add_argument("family_a", help="first model family")
    p.add_argument("family_b", help="second model family")
    p.add_argument("--config", help="run config JSON (data source, hyperparameters, grouping)")
    p.add_argument("--synth-default", action="store_true", help="use the default synthetic cohort and settings")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        return _report_error(exc.code, exc.message, exc.exit_code)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (jsonschema.ValidationError, json.JSONDecodeError) as exc:
        return _report_error("invalid_document", str(exc).splitlines()[0], EXIT_USAGE)
    except (OSError, ValueError, KeyError, ArithmeticError) as exc:
        return _report_error(type(exc).__name__, str(exc), EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
