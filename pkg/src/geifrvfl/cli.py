"""Command-line entry point: ``geifrvfl bench|noise|stats|model``.

Runs are driven by a JSON config; command-line flags override its fields.
Exit codes: 0 success, 2 configuration or model-file error, 3 dataset
error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__, report
from .dataset import NOISE_LEVELS, NoiseSpec, load_dataset, normalize, synth_gaussians
from .errors import ConfigError, DatasetError, DimensionMismatch, GEIFRVFLError, NumericalFailure
from .evaluation import GridSpec, featuremap_seed, grid_search
from .featuremap import init_featuremap
from .persist import load_model, save_model
from .solver import VARIANTS, TrainConfig, decision_scores, fit, labels_from_scores

log = logging.getLogger("geifrvfl")

ENV_OUTPUT_DIR = "GEIFRVFL_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "geifrvfl-out"
EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


@dataclass
class RunConfig:
    datasets: list
    variants: list
    grids: GridSpec = field(default_factory=GridSpec)
    folds: int = 5
    seeds: list = field(default_factory=lambda: [0])
    noise_levels: list = field(default_factory=lambda: list(NOISE_LEVELS))
    noise_mode: str = "fraction"
    nested: bool = False
    output_dir: str | None = None
    base_dir: str = "."

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("config lists no datasets")
        if not self.variants:
            raise ConfigError("config lists no variants")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise ConfigError(f"unknown variants {bad}; choose from {list(VARIANTS)}")
        if int(self.folds) != self.folds or self.folds < 2:
            raise ConfigError(f"folds must be an integer >= 2, got {self.folds}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        self.seeds = [int(s) for s in self.seeds]
        if any(not 0 <= lv < 1 for lv in self.noise_levels):
            raise ConfigError(f"noise levels must lie in [0, 1), got {self.noise_levels}")
        if self.noise_mode not in ("fraction", "amplitude"):
            raise ConfigError(f"noise_mode must be 'fraction' or 'amplitude', got {self.noise_mode!r}")

    @classmethod
    def from_dict(cls, d, base_dir="."):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"datasets", "variants", "grids", "folds", "seeds", "noise_levels", "noise_mode",
                 "nested", "output_dir"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            grids = GridSpec.from_dict(d.get("grids", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad grids: {exc}") from exc
        return cls(
            datasets=list(d.get("datasets", [])),
            variants=list(d.get("variants", [])),
            grids=grids,
            folds=d.get("folds", 5),
            seeds=list(d.get("seeds", [0])),
            noise_levels=[float(x) for x in d.get("noise_levels", NOISE_LEVELS)],
            noise_mode=d.get("noise_mode", "fraction"),
            nested=bool(d.get("nested", False)),
            output_dir=d.get("output_dir"),
            base_dir=str(base_dir),
        )

    def to_dict(self):
        return {
            "datasets": self.datasets, "variants": self.variants, "grids": self.grids.to_dict(),
            "folds": self.folds, "seeds": self.seeds, "noise_levels": self.noise_levels,
            "noise_mode": self.noise_mode, "nested": self.nested,
        }


def load_config(path):
    p = Path(path)
    try:
        d = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(d, base_dir=p.parent)


def resolve_dataset(entry, base_dir="."):
    """A dataset entry is a file path or ``{"synthetic": {...}}``."""
    if isinstance(entry, str):
        p = Path(entry)
        if not p.is_absolute():
            p = Path(base_dir) / p
        return load_dataset(p)
    if isinstance(entry, dict) and "synthetic" in entry:
        spec = dict(entry["synthetic"])
        try:
            ds = synth_gaussians(int(spec.pop("n_pos")), int(spec.pop("n_neg")), int(spec.pop("p")),
                                 float(spec.pop("separation")), int(spec.pop("seed", 0)))
        except KeyError as exc:
            raise ConfigError(f"synthetic dataset needs {exc}") from exc
        if spec:
            raise ConfigError(f"unknown synthetic keys: {sorted(spec)}")
        return replace(ds, name=entry.get("name", ds.name))
    raise ConfigError(f"bad dataset entry {entry!r}")


def output_dir(cfg, override=None):
    return Path(override or cfg.output_dir or os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR)


def manifest(command, cfg):
    return {
        "tool": "geifrvfl",
        "version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "seeds": cfg.seeds,
        "libraries": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "mpmath": mpmath.__version__,
        },
    }


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def run_benchmark(cfg, datasets, noise=None, jobs=1):
    runs = []
    for ds in datasets:
        for v in cfg.variants:
            t0 = time.perf_counter()
            res = grid_search(ds, v, cfg.grids, cfg.folds, cfg.seeds, noise, cfg.nested, jobs)
            c = res.best_cell
            log.info("%s %s: AUC %.4f at h_l=%d C=%g mu=%s theta=%g (%d cells, %.1fs)",
                     ds.name, v, res.best_auc, c.h_l, c.C, c.mu, c.theta, len(res.table),
                     time.perf_counter() - t0)
            runs.append((ds.name, v, res))
    return runs


def write_bench_outputs(out, runs):
    _write(out / "results.csv", report.results_csv(runs))
    for name in dict.fromkeys(ds for ds, _, _ in runs):
        _write(out / "results" / f"{name}.csv", report.results_csv([r for r in runs if r[0] == name]))
    _write(out / "summary.csv", report.summary_csv(runs))
    _write(out / "summary.md", report.summary_md(runs))
    datasets, variants, A = report.auc_matrix(runs)
    if len(variants) >= 2:
        _write(out / "ranks.csv", report.ranks_csv(datasets, variants, A))
        _write(out / "stats.md", report.stats_md(datasets, variants, A))


def _apply_overrides(cfg, args):
    if getattr(args, "folds", None) is not None:
        cfg.folds = args.folds
    if getattr(args, "seeds", None):
        cfg.seeds = args.seeds
    if getattr(args, "variants", None):
        cfg.variants = args.variants
    if getattr(args, "nested", False):
        cfg.nested = True
    if getattr(args, "noise_levels", None):
        cfg.noise_levels = args.noise_levels
    if getattr(args, "noise_mode", None):
        cfg.noise_mode = args.noise_mode
    cfg.__post_init__()
    return cfg


def cmd_bench(args):
    cfg = _apply_overrides(load_config(args.config), args)
    out = output_dir(cfg, args.output_dir)
    datasets = [resolve_dataset(e, cfg.base_dir) for e in cfg.datasets]
    runs = run_benchmark(cfg, datasets, None, args.jobs)
    write_bench_outputs(out, runs)
    _write(out / "manifest.json", json.dumps(manifest("bench", cfg), indent=2) + "\n")
    print(report.summary_md(runs), end="")
    return EXIT_OK


def _level_dir(level):
    return f"level_{level:g}"


def cmd_noise(args):
    cfg = _apply_overrides(load_config(args.config), args)
    out = output_dir(cfg, args.output_dir)
    datasets = [resolve_dataset(e, cfg.base_dir) for e in cfg.datasets]
    level_runs = {}
    for level in sorted(set(cfg.noise_levels)):
        noise = NoiseSpec(level, 0, cfg.noise_mode) if level > 0 else None
        runs = run_benchmark(cfg, datasets, noise, args.jobs)
        write_bench_outputs(out / _level_dir(level), runs)
        level_runs[level] = runs
    csv_text, md_text = report.noise_tables(level_runs)
    _write(out / "noise_summary.csv", csv_text)
    _write(out / "noise_summary.md", md_text)
    _write(out / "manifest.json", json.dumps(manifest("noise", cfg), indent=2) + "\n")
    print(md_text, end="")
    return EXIT_OK


def cmd_stats(args):
    try:
        text = Path(args.auc_csv).read_text()
    except OSError as exc:
        raise DatasetError(f"cannot read {args.auc_csv}: {exc}") from exc
    try:
        datasets, models, A = report.read_auc_csv(text)
    except ValueError as exc:
        raise DatasetError(f"{args.auc_csv}: {exc}") from exc
    if args.reference is not None and args.reference not in models:
        raise ConfigError(f"reference model {args.reference!r} not in {models}")
    md = report.stats_md(datasets, models, A, args.reference)
    if args.output_dir:
        out = Path(args.output_dir)
        _write(out / "ranks.csv", report.ranks_csv(datasets, models, A))
        _write(out / "stats.md", md)
    print(md, end="")
    return EXIT_OK


def _read_features(path):
    """Numeric feature rows; a non-numeric first line is taken as a header."""
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    rows = []
    for i, ln in enumerate(lines):
        cells = [c.strip() for c in ln.split(",")]
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            if i == 0:
                continue
            raise DatasetError(f"{path}:{i + 1}: non-numeric feature value") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise DatasetError(f"{path}: rows must be non-empty with equal length")
    return np.array(rows)


def cmd_model(args):
    if args.model_cmd == "save":
        ds = load_dataset(args.data)
        cfg = TrainConfig(args.variant, C=args.C, theta=args.theta, mu=args.mu)
        fm = init_featuremap(ds.n_features, args.h_l, args.activation, featuremap_seed(args.seed, args.h_l))
        model = fit(normalize(ds), cfg, fm)
        save_model(model, args.out)
        log.info("saved %s model (%d weights) to %s", cfg.variant, model.beta.size, args.out)
        return EXIT_OK
    model = load_model(args.model)
    if args.model_cmd == "load":
        print(json.dumps({
            "variant": model.config.variant, "C": model.config.C, "theta": model.config.theta,
            "mu": model.config.mu, "p": model.fm.n_inputs, "h_l": model.fm.n_hidden,
            "n_weights": int(model.beta.size),
        }, indent=2))
        return EXIT_OK
    X = _read_features(args.features)
    if X.shape[1] != model.fm.n_inputs:
        raise DimensionMismatch(f"feature file has {X.shape[1]} columns, model expects {model.fm.n_inputs}")
    scores = decision_scores(model, X)
    lines = ["label,score"] + [f"{int(lab)},{s!r}" for lab, s in zip(labels_from_scores(scores), scores.tolist())]
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_flags(p, noise=False):
    p.add_argument("config", help="JSON run config")
    p.add_argument("--output-dir", help=f"output directory (default: config, ${ENV_OUTPUT_DIR}, ./{DEFAULT_OUTPUT_DIR})")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for fold scans")
    p.add_argument("--folds", type=int)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--variants", nargs="+", choices=VARIANTS)
    p.add_argument("--nested", action="store_true", help="also report nested-CV AUC")
    if noise:
        p.add_argument("--noise-levels", type=float, nargs="+")
        p.add_argument("--noise-mode", choices=("fraction", "amplitude"))


def build_parser():
    ap = argparse.ArgumentParser(prog="geifrvfl", description="Graph-embedded IF-weighted RVFL benchmarks")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    _run_flags(sub.add_parser("bench", help="grid-search every dataset x variant"))
    _run_flags(sub.add_parser("noise", help="bench repeated at several training-noise levels"), noise=True)

    st = sub.add_parser("stats", help="rank / Friedman / Nemenyi / sign-test report for an AUC table")
    st.add_argument("auc_csv")
    st.add_argument("--reference", help="model compared in the sign test (default: best average rank)")
    st.add_argument("--output-dir")

    mp = sub.add_parser("model", help="train, inspect or apply a saved model")
    msub = mp.add_subparsers(dest="model_cmd", required=True)
    sv = msub.add_parser("save", help="fit on a whole dataset and write a JSON model")
    sv.add_argument("data")
    sv.add_argument("--out", required=True)
    sv.add_argument("--variant", choices=VARIANTS, default="GE_IFRVFL_CIL_1")
    sv.add_argument("--h-l", dest="h_l", type=int, default=23)
    sv.add_argument("--C", type=float, default=1.0)
    sv.add_argument("--theta", type=float, default=0.0)
    sv.add_argument("--mu", type=float, default=1.0)
    sv.add_argument("--seed", type=int, default=0)
    sv.add_argument("--activation", default="relu", choices=("relu", "sigmoid", "tanh"))
    ld = msub.add_parser("load", help="validate a model file and print its settings")
    ld.add_argument("model")
    pr = msub.add_parser("predict", help="label and score rows of a feature CSV")
    pr.add_argument("model")
    pr.add_argument("features")
    pr.add_argument("--out")
    return ap


COMMANDS = {"bench": cmd_bench, "noise": cmd_noise, "stats": cmd_stats, "model": cmd_model}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except NumericalFailure as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except DatasetError as exc:
        log.error("dataset error: %s", exc)
        return EXIT_DATA
    except (ConfigError, GEIFRVFLError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
