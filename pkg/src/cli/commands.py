"""
Subcommand implementations. Each takes a validated RunConfig, writes its
artifacts under ``config.out`` and returns the in-memory result.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple
import logging

import numpy as np
import pandas as pd
from scipy.stats import binomtest
from tqdm import tqdm

from ..contrastive import BclConfig, ThresholdSource
from ..datagen import (
    load_feature_dataset,
    make_confusable_profiles,
    parse_pair_specs,
    sample_dataset,
    write_dataset,
)
from ..errors import ConfigError
from ..model import (
    FeatureDataset,
    GradcheckReport,
    MlpClassifier,
    TrainConfig,
    TrainReport,
    evaluate,
    export_embeddings,
    gradient_check,
    train,
)
from ..prototype import SimilarityPrototype, build_prototype
from ..semantic_stats import DatasetSemanticSummary, summarize_dataset
from ..semantic_stats.ingestion_pipeline import SPLIT_NAME
from .persistence import (
    load_checkpoint,
    load_prototype,
    read_json,
    read_representations,
    save_checkpoint,
    save_prototype,
    summary_digest,
    write_frame,
    write_json,
    write_matrix_csv,
    write_representations,
)
from .run_config import RunConfig
from .strategies import StrategySpec, expand_steps, label_strategy, parse_strategy

logger = logging.getLogger(__name__)

REPRESENTATIONS_FILE = "representations.csv"
BENCH_TABLE = "bench.csv"


@dataclass(eq=False)
class RunData:
    """Features to train on plus a lazily built train-split summary"""

    features: FeatureDataset
    root: Optional[Path] = None
    generated_summary: Optional[DatasetSemanticSummary] = None

    def train_summary(self, workers: int = 1, show_progress: bool = False) -> DatasetSemanticSummary:
        if self.generated_summary is not None:
            return self.generated_summary
        split = "train" if (self.root / SPLIT_NAME).exists() else None
        return summarize_dataset(self.root, split=split, workers=workers, show_progress=show_progress)


def _split_arg(config: RunConfig) -> Optional[str]:
    return None if config.data.split == "all" else config.data.split


def _generate(config: RunConfig):
    gen = config.gen
    profiles = make_confusable_profiles(
        gen.classes, gen.labels, parse_pair_specs(gen.pairs), seed=config.seed, regions=gen.regions,
        background=gen.background,
    )
    return sample_dataset(
        profiles,
        per_class=gen.per_class,
        width=gen.width,
        height=gen.height,
        noise=gen.noise,
        distractors=gen.distractors,
        train_fraction=gen.train_fraction,
        seed=config.seed,
        distractor_scale=gen.distractor_scale,
        show_progress=not config.quiet,
    )


def load_run_data(config: RunConfig) -> RunData:
    """Features from data.root, or a dataset generated in memory from the gen section"""
    if config.data.root is not None:
        return RunData(features=load_feature_dataset(config.data.root), root=Path(config.data.root))
    logger.info("No data.root given; generating the dataset in memory")
    dataset = _generate(config)
    return RunData(features=dataset.to_feature_dataset(), generated_summary=dataset.summary("train"))


def resolve_prototype(config: RunConfig, data: RunData) -> SimilarityPrototype:
    """Archived prototype when configured, otherwise built from the train split"""
    if config.prototype.archive is not None:
        prototype, _ = load_prototype(config.prototype.archive)
    else:
        summary = data.train_summary(show_progress=not config.quiet)
        prototype = build_prototype(summary, config.prototype.metric)
    if list(prototype.class_names) != list(data.features.class_names):
        raise ConfigError(
            f"Prototype classes {list(prototype.class_names)} do not match dataset classes "
            f"{list(data.features.class_names)}"
        )
    return prototype


def _bcl_config(config: RunConfig, contrastive: Optional[str]) -> Optional[BclConfig]:
    if contrastive is None:
        return None
    return BclConfig(
        indexing=config.bcl.indexing,
        similarity=config.bcl.similarity,
        reduction=config.bcl.reduction,
        thresholds=ThresholdSource(contrastive),
        weight=config.bcl.weight,
    )


def run_training(config: RunConfig, spec: StrategySpec, seed: int, data: FeatureDataset,
                 prototype_matrix: Optional[np.ndarray], out_dir) -> TrainReport:
    """Train one (strategy, seed) run and write its report, metrics, confusion and checkpoint"""
    out_dir = Path(out_dir)
    C = data.num_classes
    strategy = label_strategy(
        spec, C, prototype_matrix,
        step=config.labels.step, cap=config.labels.cap, epsilon=config.labels.epsilon,
    )
    model = MlpClassifier.initialize([data.feature_dim, *config.train.hidden, C], seed)
    train_config = TrainConfig(
        strategy=strategy,
        bcl=_bcl_config(config, spec.contrastive),
        prototype=prototype_matrix,
        epochs=config.train.epochs,
        batch_size=config.train.batch_size,
        learning_rate=config.train.learning_rate,
        weight_decay=config.train.weight_decay,
        seed=seed,
        shuffle=config.train.shuffle,
    )
    report = train(model, data, train_config)

    write_frame(report.to_frame(), out_dir / "report.csv")
    write_matrix_csv(report.confusion, data.class_names, out_dir / "confusion.csv")
    save_checkpoint(model, out_dir / "checkpoint.txt")
    metrics = {
        "strategy": spec.name,
        "seed": seed,
        "test_accuracy": report.test_accuracy,
        "confusion": report.confusion.tolist(),
        "config": config.model_dump(mode="json"),
    }
    if config.train.record_timing:
        metrics["wall_clock_seconds"] = report.wall_clock_seconds
    write_json(metrics, out_dir / "metrics.json")
    logger.info(f"{spec.name} seed {seed}: test accuracy {report.test_accuracy:.4f}")
    return report


def cmd_stats(config: RunConfig) -> DatasetSemanticSummary:
    """Class-level semantic representations of data.root"""
    if config.data.root is None:
        raise ConfigError("stats needs a dataset root (data.root)")
    summary = summarize_dataset(
        config.data.root, split=_split_arg(config), show_progress=not config.quiet,
    )
    write_representations(summary, Path(config.out) / REPRESENTATIONS_FILE)
    return summary


def cmd_prototype(config: RunConfig) -> SimilarityPrototype:
    """Prototype archive from a representation CSV or a dataset root"""
    source = config.data.root
    if source is None:
        raise ConfigError("prototype needs a representation CSV or dataset root (data.root)")
    source = Path(source)
    if source.is_file():
        summary = read_representations(source)
    else:
        summary = summarize_dataset(source, split=_split_arg(config), show_progress=not config.quiet)
    prototype = build_prototype(summary, config.prototype.metric)
    save_prototype(prototype, config.out, summary.L, summary_digest(summary))
    return prototype


def cmd_gen(config: RunConfig):
    """Synthetic confusable-scene dataset written under config.out"""
    dataset = _generate(config)
    write_dataset(dataset, config.out, show_progress=not config.quiet)
    return dataset


def _training_spec(config: RunConfig) -> StrategySpec:
    spec = parse_strategy(config.labels.strategy)
    if spec.contrastive is None and config.bcl.contrastive != "none":
        spec = StrategySpec(spec.labels, config.bcl.contrastive, spec.step)
    return spec


def cmd_train(config: RunConfig) -> TrainReport:
    spec = _training_spec(config)
    data = load_run_data(config)
    matrix = resolve_prototype(config, data).matrix if spec.needs_prototype else None
    return run_training(config, spec, config.seed, data.features, matrix, config.out)


def cmd_eval(config: RunConfig) -> Tuple[float, np.ndarray]:
    """Accuracy, confusion and penultimate embeddings of a saved checkpoint"""
    if config.eval.checkpoint is None:
        raise ConfigError("eval needs a checkpoint (eval.checkpoint)")
    model = load_checkpoint(config.eval.checkpoint)
    data = load_run_data(config).features
    if config.eval.split == "train":
        features, targets = data.train_features, data.train_targets
    else:
        features, targets = data.test_features, data.test_targets
    accuracy, confusion = evaluate(model, features, targets)

    out = Path(config.out)
    write_matrix_csv(confusion, data.class_names, out / "confusion.csv")
    write_json({
        "split": config.eval.split,
        "samples": int(targets.size),
        "accuracy": accuracy,
        "confusion": confusion.tolist(),
        "checkpoint": str(config.eval.checkpoint),
    }, out / "metrics.json")
    if len(model.layer_dims) > 2:
        write_frame(export_embeddings(model, features, targets), out / "embeddings.csv")
    else:
        logger.warning("Checkpoint has no hidden layer; skipping embeddings.csv")
    logger.info(f"Accuracy on {config.eval.split} split: {accuracy:.4f}")
    return accuracy, confusion


def cmd_labels(config: RunConfig) -> pd.DataFrame:
    """Soft label matrices of selected epochs plus the confidence schedule"""
    spec = parse_strategy(config.labels.strategy)
    if config.prototype.archive is not None:
        prototype, _ = load_prototype(config.prototype.archive)
    else:
        prototype = resolve_prototype(config, load_run_data(config))
    strategy = label_strategy(
        spec, prototype.C, prototype.matrix,
        step=config.labels.step, cap=config.labels.cap, epsilon=config.labels.epsilon,
    )
    step = spec.step if spec.step is not None else config.labels.step
    epochs = config.labels.epochs or list(range(1, step + 3))

    out = Path(config.out)
    rows = []
    for epoch in epochs:
        labels, sigma, soft = strategy.labels_for_epoch(epoch)
        write_matrix_csv(labels.rows, prototype.class_names, out / f"labels_epoch_{epoch}.csv")
        rows.append({"epoch": epoch, "sigma": sigma, "soft": soft})
    schedule = pd.DataFrame(rows, columns=["epoch", "sigma", "soft"])
    write_frame(schedule, out / "schedule.csv")
    logger.info(f"Wrote {len(epochs)} label matrices for {spec.name}")
    return schedule


def _bench_job(args) -> str:
    config, spec, seed, data, matrix, run_dir = args
    run_training(config, spec, seed, data, matrix, run_dir)
    return str(run_dir)


def bench_table(rows: List[StrategySpec], accuracies: np.ndarray) -> pd.DataFrame:
    """
    Aggregate a rows x seeds accuracy grid

    Deltas, wins and losses are paired per seed against the first plain hard row;
    the sign test ignores ties. Without a hard row those columns stay empty.
    """
    baseline = next((i for i, spec in enumerate(rows) if spec.is_baseline), None)
    if baseline is None:
        logger.warning("No plain 'hard' strategy in the bench; deltas are left empty")
    records = []
    for i, spec in enumerate(rows):
        runs = accuracies[i]
        record = {
            "strategy": spec.name,
            "runs": runs.size,
            "mean": float(runs.mean()),
            "std": float(runs.std(ddof=1)) if runs.size > 1 else np.nan,
            "delta_vs_hard": np.nan,
            "wins": np.nan,
            "losses": np.nan,
            "sign_test_p": np.nan,
        }
        if baseline is not None:
            base = accuracies[baseline]
            wins = int((runs > base).sum())
            losses = int((runs < base).sum())
            trials = wins + losses
            record.update({
                "delta_vs_hard": float(runs.mean() - base.mean()),
                "wins": wins,
                "losses": losses,
                "sign_test_p": binomtest(wins, trials, 0.5, alternative="greater").pvalue if trials else 1.0,
            })
        records.append(record)
    table = pd.DataFrame(records)
    if baseline is not None:
        table["wins"] = table["wins"].astype(np.int64)
        table["losses"] = table["losses"].astype(np.int64)
    return table


def cmd_bench(config: RunConfig) -> pd.DataFrame:
    """
    Every (strategy, seed) run, then one comparison row per strategy

    Runs fan out over bench.workers processes; each writes its own directory
    and the table is assembled from those files in (row, seed) order.
    """
    rows = expand_steps([parse_strategy(name) for name in config.bench.strategies], config.bench.steps)
    seeds = config.bench.seeds
    data = load_run_data(config)
    matrix = None
    if any(spec.needs_prototype for spec in rows):
        matrix = resolve_prototype(config, data).matrix

    out = Path(config.out)
    run_dirs = [[out / "runs" / f"{r:02d}_{spec.name}" / f"seed_{seed}" for seed in seeds]
                for r, spec in enumerate(rows)]
    jobs = [(config, spec, seed, data.features, matrix, run_dirs[r][s])
            for r, spec in enumerate(rows) for s, seed in enumerate(seeds)]
    logger.info(f"Benchmark: {len(rows)} strategies x {len(seeds)} seeds on {config.bench.workers} worker(s)")

    progress = tqdm(total=len(jobs), desc="bench", disable=config.quiet)
    if config.bench.workers > 1:
        with ProcessPoolExecutor(max_workers=config.bench.workers) as executor:
            for _ in executor.map(_bench_job, jobs):
                progress.update(1)
    else:
        for job in jobs:
            _bench_job(job)
            progress.update(1)
    progress.close()

    accuracies = np.array([[read_json(d / "metrics.json")["test_accuracy"] for d in row_dirs]
                           for row_dirs in run_dirs], dtype=np.float64)
    table = bench_table(rows, accuracies)
    write_frame(table, out / BENCH_TABLE)
    logger.info(f"Wrote benchmark table to {out / BENCH_TABLE}")
    return table


def cmd_gradcheck(config: RunConfig) -> GradcheckReport:
    report = gradient_check(
        trials=config.gradcheck.trials,
        seed=config.seed,
        h=config.gradcheck.step,
        show_progress=not config.quiet,
    )
    out = Path(config.out)
    write_frame(report.cases, out / "gradcheck_cases.csv")
    write_frame(report.summary, out / "gradcheck_summary.csv")
    logger.info(f"Worst relative gradient error: {report.max_error:.3e}")
    return report
