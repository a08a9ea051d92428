"""Command-line front end.

Subcommands cover the pipeline end to end:

    label      ingest, clean and ramp-label a series CSV
    chaos      largest-Lyapunov surface over a delay/dimension grid
    select     greedy feature selection trace over raw lag candidates
    train      fit the wavelet + deep-network model for one quarter
    evaluate   score a saved model on quarterly test data

Exit codes: 0 success, 2 unreadable or malformed input, 3 shape/count
violations, 4 training failure. Every artifact embeds the seed and the
sha256 of the resolved configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import chaos as chaos_mod
from . import data as data_mod
from .config import RunConfig
from .dbn import DbnClassifier, load_model, save_model
from .errors import DataShapeError, InputDataError, TrainingError
from .metrics import ROC_PAIRS, count_outcomes, outcome_metrics, roc_curve, write_metrics_csv, write_roc_csv
from .preprocessing import MinMaxNormalizer, build_dataset, build_lag_candidates, write_dataset_csv
from .selection import greedy_select, make_dbn_evaluator, write_selection_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rampcast",
        description="Wind-power ramp-event forecasting pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, default=None, help="INI config file")
        sp.add_argument("--seed", type=int, default=None, help="override run.seed")
        sp.add_argument("--out", type=Path, default=None, help="output directory")

    sp = sub.add_parser("label", help="clean and ramp-label a series")
    sp.add_argument("input", type=Path)
    common(sp)

    sp = sub.add_parser("chaos", help="Lyapunov exponent surface of the power series")
    sp.add_argument("input", type=Path)
    common(sp)
    sp.add_argument("--delays", type=str, default=None, help="comma-separated delays")
    sp.add_argument("--dims", type=str, default=None, help="comma-separated dimensions")

    sp = sub.add_parser("select", help="greedy feature selection trace")
    sp.add_argument("input", type=Path)
    common(sp)
    sp.add_argument("--quarter", type=int, default=None, help="restrict to one calendar quarter's training rows")
    sp.add_argument("--max-lag", type=int, default=None, help="deepest candidate lag")

    sp = sub.add_parser("train", help="train the quarterly ramp classifier")
    sp.add_argument("input", type=Path)
    common(sp)
    sp.add_argument("--quarter", type=int, required=True, help="calendar quarter to train on")
    sp.add_argument("--wavelet", choices=("haar", "db4"), default=None)
    sp.add_argument("--no-feature-selection", action="store_true")
    sp.add_argument("--export-dataset", action="store_true", help="also write the training matrix CSV")

    sp = sub.add_parser("evaluate", help="score a saved model on test quarters")
    sp.add_argument("model", type=Path)
    sp.add_argument("input", type=Path)
    common(sp)
    sp.add_argument("--quarter", type=int, default=None, help="single quarter (default: all)")
    return parser


def _resolve_config(args) -> RunConfig:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["run.seed"] = str(args.seed)
    if getattr(args, "out", None) is not None:
        overrides["run.out"] = str(args.out)
    if getattr(args, "wavelet", None) is not None:
        overrides["wavelet.filter"] = args.wavelet
    if getattr(args, "no_feature_selection", False):
        overrides["selection.enabled"] = "false"
    if getattr(args, "delays", None) is not None:
        overrides["chaos.delays"] = args.delays
    if getattr(args, "dims", None) is not None:
        overrides["chaos.dimensions"] = args.dims
    if getattr(args, "max_lag", None) is not None:
        overrides["selection.max_lag"] = str(args.max_lag)
    return RunConfig.load(getattr(args, "config", None), overrides)


def _prepare(args, cfg: RunConfig):
    """Shared ingest path: load, clean, label."""
    records = data_mod.load_series(args.input)
    cleaned, removed = data_mod.clean_series(records)
    labels = data_mod.label_ramps(cleaned, cfg.ramp)
    return cleaned, removed, labels


def _quarter_split(records, cfg: RunConfig, quarter: int):
    splits = data_mod.split_quarters(records, cfg.ramp, window=cfg.window, train_rows=cfg.train_rows)
    for split in splits:
        if split.quarter == quarter:
            return split
    have = sorted({s.quarter for s in splits})
    raise DataShapeError(f"quarter {quarter} not present in the series (found {have})")


def cmd_label(args, cfg: RunConfig) -> int:
    records, removed, labels = _prepare(args, cfg)
    gaps = data_mod.find_gaps(records, cfg.ramp.sampling_minutes)
    out = cfg.out_dir / "labeled_series.csv"
    data_mod.write_series_csv(out, records, labels, comment=cfg.artifact_comment())
    lab = labels.labels[labels.mask]
    print(
        f"records={len(records)} removed={removed} gaps={len(gaps)} "
        f"up={int((lab == 1).sum())} down={int((lab == -1).sum())} "
        f"none={int((lab == 0).sum())} unlabeled={int((~labels.mask).sum())}"
    )
    print(f"wrote {out}")
    return 0


def cmd_chaos(args, cfg: RunConfig) -> int:
    records, _, _ = _prepare(args, cfg)
    power = np.array([r.power for r in records], dtype=float)
    grid = chaos_mod.lyapunov_surface(power, cfg.chaos_delays, cfg.chaos_dimensions)
    out = cfg.out_dir / "lyapunov_surface.csv"
    chaos_mod.write_surface_csv(out, cfg.chaos_delays, cfg.chaos_dimensions, grid,
                                comment=cfg.artifact_comment())
    defined = int(np.isfinite(grid).sum())
    positive = int((grid[np.isfinite(grid)] > 0).sum())
    print(f"cells={grid.size} defined={defined} positive={positive}")
    print(f"wrote {out}")
    return 0


def _selection_trace(records, labels, cfg: RunConfig):
    X, y, names = build_lag_candidates(records, labels, cfg.ramp, max_lag=cfg.selection_max_lag)
    evaluator = make_dbn_evaluator(
        seed=cfg.seed,
        val_fraction=cfg.selection_val_fraction,
        hidden_units=cfg.hidden_units,
        pretrain_epochs=cfg.selection_pretrain_epochs,
        finetune_iters=cfg.selection_finetune_iters,
        batch_size=cfg.train.batch_size,
    )
    subset = greedy_select(X, y, evaluator)
    return subset, names


def cmd_select(args, cfg: RunConfig) -> int:
    records, _, labels = _prepare(args, cfg)
    if args.quarter is not None:
        split = _quarter_split(records, cfg, args.quarter)
        records = split.train_records
        labels = data_mod.label_ramps(records, cfg.ramp)
    subset, names = _selection_trace(records, labels, cfg)
    out = cfg.out_dir / "selection_trace.csv"
    write_selection_csv(subset, names, out, comment=cfg.artifact_comment())
    chosen = ", ".join(names[j] for j in subset.selected)
    print(f"selected {len(subset.selected)} features ({subset.terminated_by}): {chosen}")
    print(f"final error {100.0 * subset.error_history[-1]:.2f}%")
    print(f"wrote {out}")
    return 0


def cmd_train(args, cfg: RunConfig) -> int:
    created = []
    try:
        records, _, _ = _prepare(args, cfg)
        split = _quarter_split(records, cfg, args.quarter)
        train_labels = data_mod.label_ramps(split.train_records, cfg.ramp)

        selection_report = None
        if cfg.selection_enabled:
            subset, cand_names = _selection_trace(split.train_records, train_labels, cfg)
            trace_path = cfg.out_dir / "selection_trace.csv"
            write_selection_csv(subset, cand_names, trace_path, comment=cfg.artifact_comment())
            created.append(trace_path)
            selection_report = {
                "candidates": cand_names,
                "selected": [cand_names[j] for j in subset.selected],
                "error_history": subset.error_history,
                "terminated_by": subset.terminated_by,
            }

        dataset = build_dataset(
            split.train_records, train_labels, cfg.ramp,
            wavelet_filter=cfg.wavelet_filter, window=cfg.window, levels=cfg.levels,
        )
        if args.export_dataset:
            ds_path = cfg.out_dir / "train_dataset.csv"
            write_dataset_csv(dataset, ds_path, comment=cfg.artifact_comment())
            created.append(ds_path)

        scaler = MinMaxNormalizer().fit(dataset.features)
        clf = DbnClassifier(
            hidden_units=cfg.hidden_units,
            learning_rate=cfg.train.learning_rate,
            momentum=cfg.train.momentum,
            cd_steps=cfg.train.cd_steps,
            pretrain_epochs=cfg.train.pretrain_epochs,
            finetune_iters=cfg.train.finetune_max_iters,
            finetune_lr=cfg.train.finetune_lr,
            batch_size=cfg.train.batch_size,
            seed=cfg.seed,
            eq8_literal=cfg.train.eq8_literal,
        )
        clf.fit(scaler.transform(dataset.features), dataset.labels)

        model_path = cfg.out_dir / "model.json"
        save_model(
            model_path, clf,
            normalizer=scaler,
            feature_names=dataset.feature_names,
            feature_recipe={
                "mode": "wavelet",
                "filter": cfg.wavelet_filter,
                "window": cfg.window,
                "levels": cfg.levels,
            },
            seed=cfg.seed,
            config_sha256=cfg.sha256,
        )
        created.append(model_path)

        train_pred = clf.predict(scaler.transform(dataset.features))
        train_acc = float(np.mean(train_pred == dataset.labels))
        report = {
            "seed": cfg.seed,
            "config_sha256": cfg.sha256,
            "quarter": args.quarter,
            "year": split.year,
            "n_train_rows": len(dataset),
            "feature_count": dataset.features.shape[1],
            "selection": selection_report,
            "pretrain_errors": clf.pretrain_errors_,
            "loss_curve": clf.loss_curve_,
            "final_loss": clf.loss_curve_[-1],
            "train_accuracy": train_acc,
        }
        report_path = cfg.out_dir / "training_report.json"
        with open(report_path, "w") as fh:
            json.dump(report, fh, indent=1)
            fh.write("\n")
        created.append(report_path)

        print(f"quarter {split.year}Q{split.quarter}: {len(dataset)} rows, "
              f"{dataset.features.shape[1]} features")
        print(f"final loss {clf.loss_curve_[-1]:.6f}, train accuracy {100.0 * train_acc:.2f}%")
        print(f"wrote {model_path}")
        print(f"wrote {report_path}")
        return 0
    except BaseException:
        # never leave a half-written artifact set behind
        for p in created:
            Path(p).unlink(missing_ok=True)
        raise


def cmd_evaluate(args, cfg: RunConfig) -> int:
    bundle = load_model(args.model)
    recipe = bundle.feature_recipe or {"mode": "wavelet", "filter": cfg.wavelet_filter,
                                       "window": cfg.window, "levels": cfg.levels}
    records, _, _ = _prepare(args, cfg)
    splits = data_mod.split_quarters(records, cfg.ramp, window=int(recipe["window"]),
                                     train_rows=cfg.train_rows)
    if args.quarter is not None:
        splits = [s for s in splits if s.quarter == args.quarter]
        if not splits:
            raise DataShapeError(f"quarter {args.quarter} not present in the series")

    rows = []
    for split in splits:
        if not split.test_records:
            print(f"quarter {split.year}Q{split.quarter}: no test rows, skipped", file=sys.stderr)
            continue
        test_labels = data_mod.label_ramps(split.test_records, cfg.ramp)
        dataset = build_dataset(
            split.test_records, test_labels, cfg.ramp,
            wavelet_filter=recipe["filter"], window=int(recipe["window"]),
            levels=int(recipe["levels"]), power_features=recipe["mode"],
        )
        X = dataset.features
        if bundle.normalizer is not None:
            X = bundle.normalizer.transform(X)
        probs = bundle.classifier.predict_proba(X)
        best = probs.argmax(axis=1)
        tied = probs[:, 1] == probs[np.arange(len(best)), best]
        best[tied] = 1
        pred = bundle.classifier.classes_[best]

        counts = count_outcomes(pred, dataset.labels)
        report = outcome_metrics(counts)
        rows.append(("DBN", f"{split.year}Q{split.quarter}", report))
        print(f"quarter {split.year}Q{split.quarter}: n={counts.n_total} "
              f"correct={100.0 * report.accuracy:.2f}% miss={100.0 * report.miss_rate:.2f}% "
              f"false={100.0 * report.false_rate:.2f}% reversed={100.0 * report.reversal_rate:.2f}%")

        for pair in ROC_PAIRS:
            try:
                curve = roc_curve(probs, dataset.labels, pair)
            except DataShapeError as exc:
                print(f"quarter {split.year}Q{split.quarter}: roc {pair} skipped ({exc})",
                      file=sys.stderr)
                continue
            roc_path = cfg.out_dir / f"roc_q{split.quarter}_{pair}.csv"
            write_roc_csv(curve, roc_path, comment=cfg.artifact_comment())
            print(f"roc {pair}: auc={curve.auc:.4f} -> {roc_path}")

    if not rows:
        raise DataShapeError("no quarter produced any test rows")
    metrics_path = cfg.out_dir / "metrics.csv"
    write_metrics_csv(rows, metrics_path, comment=cfg.artifact_comment())
    print(f"wrote {metrics_path}")
    return 0


_COMMANDS = {
    "label": cmd_label,
    "chaos": cmd_chaos,
    "select": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](args, cfg)
    except InputDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
