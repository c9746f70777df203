"""Command-line pipeline orchestration.

Each stage reads and writes CSV/JSON files in the output directory, so the
full run is exactly the composition of the individual subcommands:

    generate -> simulate (or ingest) -> label -> split -> pca -> efs -> train

Every stage also records its parameters in <out>/config.json; the final
summary.json embeds that echo so a run is fully reproducible from its
outputs. Plot data is emitted as CSV for external tools; nothing is
rendered here.

Exit codes: 0 success, 1 usage error, 2 pipeline error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import efs as efs_mod
from . import lda as lda_mod
from . import pca as pca_mod
from .dataset import (
    ClassLabel,
    Dataset,
    FeatureId,
    builtin_material_library,
    builtin_system_constants,
    constants_to_json,
    read_dataset,
    write_dataset,
)
from .preprocess import (
    Normalizer,
    SplitConfig,
    Thresholds,
    apply_normalizer,
    fit_normalizer,
    label_dataset,
    split,
)
from .sampling import SamplerConfig, generate_dataset
from .surrogate import (
    SurrogateConfig,
    config_to_json,
    ingest_external_loads,
    load_config,
    simulate_dataset,
)

DEFAULT_GRID_RESOLUTION = 50
GRID_MARGIN = 0.05  # fractional margin added around the training range

_EFS_METRIC_FLAGS = {"train": efs_mod.METRIC_TRAIN, "cv5": efs_mod.METRIC_CV5}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse default exits 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_cell(v: float) -> str:
    return repr(float(v))


def _update_config_echo(out: Path, section: str, values: dict, created: list[Path]) -> None:
    path = out / "config.json"
    echo = json.loads(path.read_text()) if path.exists() else {}
    echo[section] = values
    if path not in created:
        created.append(path)
    path.write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list[str]], created: list[Path]) -> None:
    created.append(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# pipeline stages

def stage_generate(out: Path, seed: int, n_per_material: int, created: list[Path]) -> None:
    cfg = SamplerConfig(seed=seed, n_per_material=n_per_material)
    dataset = generate_dataset(builtin_material_library(), cfg)
    created.append(out / "dataset.csv")
    write_dataset(dataset, out / "dataset.csv")
    _update_config_echo(
        out, "generate", {"seed": seed, "n_per_material": n_per_material}, created
    )


def stage_simulate(out: Path, cfg: SurrogateConfig, created: list[Path]) -> None:
    dataset = read_dataset(out / "dataset.csv")
    simulated = simulate_dataset(dataset, cfg)
    created.append(out / "dataset.csv")
    write_dataset(simulated, out / "dataset.csv")
    _update_config_echo(
        out,
        "surrogate",
        {
            "config": config_to_json(cfg),
            "system_constants": constants_to_json(builtin_system_constants()),
        },
        created,
    )


def stage_ingest(out: Path, loads_path: str, created: list[Path]) -> None:
    dataset = read_dataset(out / "dataset.csv")
    loaded = ingest_external_loads(dataset, loads_path)
    created.append(out / "dataset.csv")
    write_dataset(loaded, out / "dataset.csv")
    _update_config_echo(out, "ingest", {"loads_path": str(loads_path)}, created)


def stage_label(out: Path, thresholds: Thresholds, created: list[Path]) -> None:
    dataset = read_dataset(out / "dataset.csv")
    labeled = label_dataset(dataset, thresholds)
    created.append(out / "dataset.csv")
    write_dataset(labeled, out / "dataset.csv")
    _update_config_echo(
        out,
        "thresholds",
        {"low_max": thresholds.low_max, "high_min": thresholds.high_min},
        created,
    )


def stage_split(out: Path, cfg: SplitConfig, created: list[Path]) -> None:
    dataset = read_dataset(out / "dataset.csv")
    train, test = split(dataset, cfg)
    created.append(out / "train.csv")
    write_dataset(train, out / "train.csv")
    created.append(out / "test.csv")
    write_dataset(test, out / "test.csv")
    _update_config_echo(
        out,
        "split",
        {
            "train_fraction": cfg.train_fraction,
            "seed": cfg.seed,
            "stratified": cfg.stratified,
        },
        created,
    )


def stage_pca(out: Path, created: list[Path]) -> None:
    train = read_dataset(out / "train.csv")
    norm = fit_normalizer(train)
    train_n = apply_normalizer(norm, train)
    model = pca_mod.fit_pca(train_n)

    _write_csv(
        out / "scree.csv",
        ["pc", "ratio", "cumulative"],
        [
            [str(i + 1), _float_cell(model.explained_variance_ratio[i]),
             _float_cell(model.cumulative_ratio[i])]
            for i in range(model.p)
        ],
        created,
    )
    _write_csv(
        out / "loadings.csv",
        ["feature"] + [f"pc{j + 1}" for j in range(model.p)],
        [
            [name] + [_float_cell(v) for v in row]
            for name, row in pca_mod.loading_report(model)
        ],
        created,
    )
    labels = train.labels()
    for i, j in ((1, 2), (1, 3), (2, 3)):
        scores = pca_mod.project(model, train_n, [i, j])
        _write_csv(
            out / f"scores_{i}_{j}.csv",
            [f"pc{i}", f"pc{j}", "label"],
            [
                [_float_cell(s[0]), _float_cell(s[1]), lbl.csv_value]
                for s, lbl in zip(scores, labels)
            ],
            created,
        )


def stage_efs(out: Path, metric: str, cv_seed: int, created: list[Path]) -> None:
    train = read_dataset(out / "train.csv")
    report = efs_mod.run_efs(train, metric=metric, cv_seed=cv_seed)
    _write_csv(
        out / "efs_accuracy.csv",
        ["subset", "size", "metric", "flag"],
        [
            [r.subset_names(), str(r.size), _float_cell(r.metric_value),
             str(int(r.fit_failed))]
            for r in report.all_results
        ],
        created,
    )
    _update_config_echo(out, "efs", {"metric": metric, "cv_seed": cv_seed}, created)


def _read_top4_from_loadings(path: Path) -> list[FeatureId]:
    by_name = {f.column_name: f for f in FeatureId}
    pc1: dict[FeatureId, float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            pc1[by_name[row["feature"]]] = float(row["pc1"])
    ranked = sorted(pc1, key=lambda f: (-pc1[f], int(f)))
    return ranked[:4]


def _read_best4_from_efs(path: Path) -> list[FeatureId]:
    by_name = {f.column_name: f for f in FeatureId}
    best: tuple[float, list[FeatureId]] | None = None
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            if int(row["size"]) != 4:
                continue
            metric = float(row["metric"])
            if best is None or metric > best[0]:
                best = (metric, [by_name[n] for n in row["subset"].split("+")])
    if best is None:
        raise ValueError(f"no size-4 subsets in {path}")
    return best[1]


def _class_counts(labels: list) -> dict[str, int]:
    return {lbl.csv_value: sum(1 for y in labels if y == lbl) for lbl in ClassLabel}


def _fit_on_features(
    features: list[FeatureId], train_n: Dataset, test_n: Dataset
) -> tuple[float, float]:
    cols = [int(f) for f in features]
    x_train = train_n.feature_matrix()[:, cols]
    x_test = test_n.feature_matrix()[:, cols]
    model = lda_mod.fit_lda(x_train, train_n.labels())
    return (
        lda_mod.accuracy(model, x_train, train_n.labels()),
        lda_mod.accuracy(model, x_test, test_n.labels()),
    )


def _emit_decision_grids(
    out: Path,
    features: list[FeatureId],
    train: Dataset,
    train_n: Dataset,
    norm: Normalizer,
    resolution: int,
    created: list[Path],
) -> None:
    """Six pairwise decision-region grids over the selected features, in raw
    feature units (the model works in normalized space)."""
    raw = train.feature_matrix()
    labels = train_n.labels()
    ordered = sorted(features, key=int)  # canonical order keeps names stable
    pairs = [
        (ordered[a], ordered[b])
        for a in range(len(ordered))
        for b in range(a + 1, len(ordered))
    ]
    for f1, f2 in pairs:
        cols = [int(f1), int(f2)]
        model = lda_mod.fit_lda(train_n.feature_matrix()[:, cols], labels)
        bounds = []
        for f in (f1, f2):
            lo, hi = float(raw[:, f].min()), float(raw[:, f].max())
            margin = GRID_MARGIN * (hi - lo)
            bounds.extend([lo - margin, hi + margin])
        # grid in raw units; normalize per feature before predicting
        grid_raw = lda_mod.decision_grid(
            _denormalized_twin(model, norm, f1, f2), tuple(bounds), resolution
        )
        _write_csv(
            out / f"decision_grid_{f1.column_name}_{f2.column_name}.csv",
            ["x", "y", "label"],
            [[_float_cell(x), _float_cell(y), lbl.csv_value] for x, y, lbl in grid_raw],
            created,
        )


def _denormalized_twin(
    model: lda_mod.LdaModel, norm: Normalizer, f1: FeatureId, f2: FeatureId
) -> lda_mod.LdaModel:
    """Rewrite a 2-feature model fit in z-space to accept raw coordinates.

    z = (x - mu) / sigma is affine, so delta_k(z(x)) stays linear in x:
    coefficients divide by sigma, intercepts absorb the mean shift.
    """
    sigmas = np.array([norm.std_devs[f1] or 1.0, norm.std_devs[f2] or 1.0])
    mus = np.array([norm.means[f1], norm.means[f2]])
    coef = model.coef / sigmas
    intercept = model.intercept - coef @ mus
    return lda_mod.LdaModel(
        classes=model.classes,
        means=model.means,
        pooled_covariance=model.pooled_covariance,
        solver=model.solver,
        log_priors=model.log_priors,
        p=2,
        coef=coef,
        intercept=intercept,
    )


def stage_train(out: Path, grid_resolution: int, created: list[Path]) -> None:
    dataset = read_dataset(out / "dataset.csv")
    train = read_dataset(out / "train.csv")
    test = read_dataset(out / "test.csv")
    norm = fit_normalizer(train)
    train_n = apply_normalizer(norm, train)
    test_n = apply_normalizer(norm, test)

    pca_features = _read_top4_from_loadings(out / "loadings.csv")
    efs_features = _read_best4_from_efs(out / "efs_accuracy.csv")
    pca_train_acc, pca_test_acc = _fit_on_features(pca_features, train_n, test_n)
    efs_train_acc, efs_test_acc = _fit_on_features(efs_features, train_n, test_n)

    _emit_decision_grids(out, pca_features, train, train_n, norm, grid_resolution, created)
    _update_config_echo(out, "train", {"grid_resolution": grid_resolution}, created)

    scree = []
    with open(out / "scree.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            scree.append((float(row["ratio"]), float(row["cumulative"])))
    efs_best: dict[str, dict] = {}
    overall: dict | None = None
    with open(out / "efs_accuracy.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            entry = {
                "subset": row["subset"].split("+"),
                "metric": float(row["metric"]),
                "fit_failed": bool(int(row["flag"])),
            }
            size = row["size"]
            if size not in efs_best or entry["metric"] > efs_best[size]["metric"]:
                efs_best[size] = entry
            if overall is None or entry["metric"] > overall["metric"]:
                overall = entry

    echo = json.loads((out / "config.json").read_text())
    summary = {
        "config": echo,
        "counts": {
            "total": len(dataset),
            "per_class": _class_counts(dataset.labels()),
            "train": {"total": len(train), "per_class": _class_counts(train.labels())},
            "test": {"total": len(test), "per_class": _class_counts(test.labels())},
        },
        "pca": {
            "explained_variance_ratio": [r for r, _ in scree],
            "cumulative_ratio": [c for _, c in scree],
            "top_features": [f.column_name for f in pca_features],
        },
        "efs": {"best_per_size": efs_best, "overall_best": overall},
        "lda": {
            "pca_selected": {
                "features": [f.column_name for f in pca_features],
                "train_accuracy": pca_train_acc,
                "test_accuracy": pca_test_acc,
            },
            "efs_selected": {
                "features": [f.column_name for f in efs_features],
                "train_accuracy": efs_train_acc,
                "test_accuracy": efs_test_acc,
            },
        },
    }
    created.append(out / "summary.json")
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# command wiring

def _surrogate_from_args(args: argparse.Namespace) -> SurrogateConfig:
    if args.surrogate_config:
        return load_config(args.surrogate_config)
    return SurrogateConfig()


def _run_stages(stages: list[tuple[str, callable]], out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    for name, fn in stages:
        try:
            fn(created)
        except Exception as exc:
            for path in created:
                path.unlink(missing_ok=True)
            print(f"error in stage {name}: {exc}", file=sys.stderr)
            return 2
    return 0


def cmd_run_all(args: argparse.Namespace) -> int:
    out = Path(args.out)
    surrogate_cfg = _surrogate_from_args(args)
    thresholds = Thresholds(low_max=args.low_max, high_min=args.high_min)
    split_cfg = SplitConfig(
        train_fraction=args.train_frac,
        seed=args.split_seed,
        stratified=not args.no_stratify,
    )
    metric = _EFS_METRIC_FLAGS[args.efs_metric]
    load_stage = (
        ("ingest", lambda c: stage_ingest(out, args.ingest_loads, c))
        if args.ingest_loads
        else ("simulate", lambda c: stage_simulate(out, surrogate_cfg, c))
    )
    stages = [
        ("generate", lambda c: stage_generate(out, args.seed, args.n_per_material, c)),
        load_stage,
        ("label", lambda c: stage_label(out, thresholds, c)),
        ("split", lambda c: stage_split(out, split_cfg, c)),
        ("pca", lambda c: stage_pca(out, c)),
        ("efs", lambda c: stage_efs(out, metric, args.cv_seed, c)),
        ("train", lambda c: stage_train(out, args.grid_resolution, c)),
    ]
    return _run_stages(stages, out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="envload", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", default="out", help="output directory")

    def add_generate_args(p):
        p.add_argument("--seed", type=int, default=42, help="sampler seed")
        p.add_argument("--n-per-material", type=int, default=100)

    def add_surrogate_args(p):
        p.add_argument("--surrogate-config", default=None, metavar="JSON",
                       help="JSON file overriding surrogate constants")

    def add_threshold_args(p):
        p.add_argument("--low-max", type=float, default=75.0)
        p.add_argument("--high-min", type=float, default=90.0)

    def add_split_args(p):
        p.add_argument("--train-frac", type=float, default=0.35)
        p.add_argument("--split-seed", type=int, default=42)
        p.add_argument("--no-stratify", action="store_true")

    def add_efs_args(p):
        p.add_argument("--efs-metric", choices=sorted(_EFS_METRIC_FLAGS),
                       default="train")
        p.add_argument("--cv-seed", type=int, default=42)

    def add_train_args(p):
        p.add_argument("--grid-resolution", type=int, default=DEFAULT_GRID_RESOLUTION)

    run = sub.add_parser("run", help="full pipeline")
    for add in (add_generate_args, add_surrogate_args, add_threshold_args,
                add_split_args, add_efs_args, add_train_args, add_out):
        add(run)
    run.add_argument("--ingest-loads", default=None, metavar="CSV",
                     help="attach externally computed loads instead of simulating")
    run.set_defaults(func=cmd_run_all)

    p = sub.add_parser("generate", help="sample the material library")
    add_generate_args(p)
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("generate", lambda c: stage_generate(Path(a.out), a.seed, a.n_per_material, c))],
        Path(a.out)))

    p = sub.add_parser("simulate", help="attach surrogate loads")
    add_surrogate_args(p)
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("simulate", lambda c: stage_simulate(Path(a.out), _surrogate_from_args(a), c))],
        Path(a.out)))

    p = sub.add_parser("ingest", help="attach externally computed loads")
    p.add_argument("--ingest-loads", required=True, metavar="CSV")
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("ingest", lambda c: stage_ingest(Path(a.out), a.ingest_loads, c))],
        Path(a.out)))

    p = sub.add_parser("label", help="label loads into classes")
    add_threshold_args(p)
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("label", lambda c: stage_label(
            Path(a.out), Thresholds(low_max=a.low_max, high_min=a.high_min), c))],
        Path(a.out)))

    p = sub.add_parser("split", help="train/test split")
    add_split_args(p)
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("split", lambda c: stage_split(
            Path(a.out),
            SplitConfig(train_fraction=a.train_frac, seed=a.split_seed,
                        stratified=not a.no_stratify), c))],
        Path(a.out)))

    p = sub.add_parser("pca", help="scree, loadings, and PC scores")
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("pca", lambda c: stage_pca(Path(a.out), c))], Path(a.out)))

    p = sub.add_parser("efs", help="exhaustive feature-subset sweep")
    add_efs_args(p)
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("efs", lambda c: stage_efs(
            Path(a.out), _EFS_METRIC_FLAGS[a.efs_metric], a.cv_seed, c))],
        Path(a.out)))

    p = sub.add_parser("train", help="fit final models, grids, and summary")
    add_train_args(p)
    add_out(p)
    p.set_defaults(func=lambda a: _run_stages(
        [("train", lambda c: stage_train(Path(a.out), a.grid_resolution, c))],
        Path(a.out)))

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
