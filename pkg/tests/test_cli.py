import json

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

import simproto
from src.cli import (
    StrategySpec,
    bench_table,
    expand_steps,
    label_strategy,
    load_checkpoint,
    load_prototype,
    load_run_config,
    parse_overrides,
    parse_strategy,
    read_representations,
)
from src.errors import ConfigError
from src.label_softening import GlsLabels, HardLabels, LsrLabels, SofteningSchedule, sigma0_of
from src.model import evaluate
from src.datagen import load_feature_dataset
from src.prototype import CorrelationMetric, build_prototype
from src.semantic_stats import DatasetManifest, LabelMap, summarize_dataset, write_label_map, write_manifest

SMALL_GEN = [
    "--gen.classes", "3", "--gen.labels", "6", "--gen.regions", "4", "--gen.width", "4", "--gen.height", "4",
    "--gen.per_class", "10", "--gen.pairs", "1-2:0.5,2-3:0.3,1-3:0.2",
    "--gen.background", "0", "--gen.distractors", "4",
]


def run(*args) -> int:
    return simproto.main([str(a) for a in args])


def tree_bytes(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def generated(tmp_path):
    root = tmp_path / "gen"
    assert run("--out", root, "--quiet", "gen", *SMALL_GEN) == 0
    return root


class TestStrategyNames:
    @pytest.mark.parametrize("text,expected", [
        ("hard", StrategySpec("hard")),
        ("LSR", StrategySpec("lsr")),
        ("gls+bcl", StrategySpec("gls", "bcl")),
        ("hard+cl", StrategySpec("hard", "cl")),
        ("gls@step=5", StrategySpec("gls", None, 5)),
        ("gls+bcl@step=0", StrategySpec("gls", "bcl", 0)),
    ])
    def test_parse(self, text, expected):
        assert parse_strategy(text) == expected

    @pytest.mark.parametrize("text", ["soft", "gls+triplet", "hard@step=3", "gls@steps=3", "gls@step=x"])
    def test_rejected(self, text):
        with pytest.raises(ConfigError):
            parse_strategy(text)

    def test_names_round_trip(self):
        for text in ("hard", "gls+bcl", "gls@step=10", "lsr+cl"):
            assert parse_strategy(text).name == text

    def test_step_zero_is_hard(self):
        spec = parse_strategy("gls@step=0")
        assert spec.effective_labels == "hard"
        assert not spec.needs_prototype
        assert isinstance(label_strategy(spec, 3), HardLabels)

    def test_baseline_and_prototype_needs(self):
        assert parse_strategy("hard").is_baseline
        assert not parse_strategy("hard+cl").is_baseline
        assert not parse_strategy("hard+cl").needs_prototype
        assert parse_strategy("hard+bcl").needs_prototype
        assert parse_strategy("gls").needs_prototype

    def test_expand_steps(self):
        rows = expand_steps([parse_strategy(s) for s in ("hard", "gls", "gls@step=7", "gls+bcl")], [5, 10])
        assert [r.name for r in rows] == [
            "hard", "gls@step=5", "gls@step=10", "gls@step=7", "gls+bcl@step=5", "gls+bcl@step=10",
        ]
        assert expand_steps([parse_strategy("gls")], []) == [parse_strategy("gls")]

    def test_label_strategy(self):
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        assert isinstance(label_strategy(parse_strategy("lsr"), 2, epsilon=0.2), LsrLabels)
        gls = label_strategy(parse_strategy("gls@step=4"), 2, S, step=20)
        assert isinstance(gls, GlsLabels) and gls.step == 4
        assert label_strategy(parse_strategy("gls"), 2, S, step=9).step == 9
        with pytest.raises(ConfigError):
            label_strategy(parse_strategy("gls"), 2)


class TestRunConfig:
    def test_defaults(self):
        config = load_run_config()
        assert config.train.epochs == 30
        assert config.train.batch_size == 32
        assert config.train.hidden == [64]
        assert config.labels.step == 20
        assert config.bench.seeds == list(range(10))
        assert config.gen.background == pytest.approx(0.05)
        assert config.gen.distractors == 16

    def test_overrides_are_coerced(self):
        overrides = parse_overrides(["--train.epochs", "5", "--bench.seeds=1,2,3", "--labels.strategy", "GLS+BCL"])
        config = load_run_config(overrides=overrides)
        assert config.train.epochs == 5
        assert config.bench.seeds == [1, 2, 3]
        assert config.labels.strategy == "gls+bcl"

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            load_run_config(overrides=parse_overrides(["--train.bogus", "1"]))

    def test_bad_strategy(self):
        with pytest.raises(ValidationError):
            load_run_config(overrides={"labels": {"strategy": "soft"}})

    def test_malformed_flag(self):
        with pytest.raises(ConfigError):
            parse_overrides(["--epochs", "3"])
        with pytest.raises(ConfigError):
            parse_overrides(["--train.epochs"])

    def test_toml_file_with_overrides(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('seed = 7\ntrain.epochs = 4\n\n[bench]\nstrategies = ["hard", "gls"]\nseeds = [1, 2]\n')
        config = load_run_config(path, parse_overrides(["--train.epochs", "6"]))
        assert config.seed == 7
        assert config.train.epochs == 6
        assert config.bench.strategies == ["hard", "gls"]
        assert config.bench.seeds == [1, 2]

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("train = [\n")
        with pytest.raises(ConfigError):
            load_run_config(path)


class TestBenchTable:
    def test_single_run_has_no_spread(self):
        table = bench_table([parse_strategy("hard")], np.array([[0.8]]))
        assert table["runs"].tolist() == [1]
        assert np.isnan(table["std"][0])
        assert table["delta_vs_hard"].tolist() == [0.0]

    def test_paired_sign_test(self):
        rows = [parse_strategy("hard"), parse_strategy("gls")]
        accuracies = np.array([[0.5] * 6, [0.6] * 6])
        table = bench_table(rows, accuracies)
        assert table["wins"].tolist() == [0, 6]
        assert table["sign_test_p"][1] == pytest.approx(0.5 ** 6)
        assert table["sign_test_p"][0] == 1.0
        assert table["delta_vs_hard"][1] == pytest.approx(0.1)

    def test_without_baseline(self):
        table = bench_table([parse_strategy("gls")], np.array([[0.7, 0.9]]))
        assert np.isnan(table["delta_vs_hard"][0])
        assert table["std"][0] == pytest.approx(np.std([0.7, 0.9], ddof=1))


class TestGenCommand:
    def test_layout(self, generated):
        manifest_text = (generated / "manifest").read_text()
        assert "labels 6" in manifest_text
        for name in ("scene_01", "scene_02", "scene_03"):
            assert len(list((generated / name).glob("*.pgm"))) == 10
        for name in ("split.csv", "features_train.csv", "features_test.csv"):
            assert (generated / name).is_file()

    def test_same_seed_same_bytes(self, generated, tmp_path):
        again = tmp_path / "again"
        assert run("--out", again, "--quiet", "gen", *SMALL_GEN) == 0
        assert tree_bytes(generated) == tree_bytes(again)


class TestStatsAndPrototype:
    def test_stats(self, toy_dataset, tmp_path):
        out = tmp_path / "stats"
        assert run("--out", out, "stats", toy_dataset) == 0
        table = pd.read_csv(out / "representations.csv")
        assert len(table) == 2
        first = (out / "representations.csv").read_bytes()
        summary = read_representations(out / "representations.csv")
        assert np.array_equal(summary.matrix(), summarize_dataset(toy_dataset).matrix())
        assert run("--out", out, "stats", toy_dataset) == 0
        assert (out / "representations.csv").read_bytes() == first

    def test_prototype_round_trip(self, toy_dataset, tmp_path):
        out = tmp_path / "proto"
        assert run("--out", out, "prototype", toy_dataset, "--prototype.metric", "euclidean") == 0
        prototype, metadata = load_prototype(out)
        expected = build_prototype(summarize_dataset(toy_dataset), CorrelationMetric.EUCLIDEAN)
        assert np.array_equal(prototype.matrix, expected.matrix)
        assert metadata["class_names"] == ["kitchen", "bedroom"]
        assert metadata["L"] == 3 and metadata["metric"] == "euclidean"

    def test_prototype_from_representation_file(self, toy_dataset, tmp_path):
        assert run("--out", tmp_path / "stats", "stats", toy_dataset) == 0
        assert run("--out", tmp_path / "proto", "prototype", tmp_path / "stats" / "representations.csv") == 0
        prototype, _ = load_prototype(tmp_path / "proto")
        assert np.array_equal(prototype.matrix, build_prototype(summarize_dataset(toy_dataset)).matrix)

    def test_identical_classes(self, tmp_path):
        root = tmp_path / "twins"
        for name in ("left", "right"):
            write_label_map(LabelMap(np.array([[1, 2], [2, 3]])), root / name / "0.pgm")
        write_manifest(DatasetManifest(root=root, L=3, classes=(("left", 1), ("right", 1))))
        assert run("--out", tmp_path / "proto", "prototype", root) == 0
        matrix = pd.read_csv(tmp_path / "proto" / "proto.csv", float_precision="round_trip")
        assert matrix.to_numpy().tolist() == [[1.0, 1.0], [1.0, 1.0]]


class TestTrainAndEval:
    def test_hard_sigma_column(self, generated, tmp_path):
        out = tmp_path / "hard"
        assert run("--out", out, "--quiet", "train", generated, "--train.epochs", "3", "--train.hidden", "8") == 0
        report = pd.read_csv(out / "report.csv")
        assert report["sigma"].tolist() == [1.0, 1.0, 1.0]
        assert load_checkpoint(out / "checkpoint.txt").layer_dims == [10, 8, 3]
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["strategy"] == "hard"
        assert "wall_clock_seconds" not in metrics

    def test_gls_sigma_follows_schedule(self, generated, tmp_path):
        out = tmp_path / "gls"
        assert run("--out", out, "--quiet", "train", generated, "--labels.strategy", "gls",
                   "--labels.step", "2", "--train.epochs", "5") == 0
        matrix = build_prototype(summarize_dataset(generated, split="train")).matrix
        schedule = SofteningSchedule(sigma0=sigma0_of(matrix), step=2)
        report = pd.read_csv(out / "report.csv", float_precision="round_trip")
        assert report["sigma"].tolist() == [schedule.sigma(e) for e in range(1, 6)]
        assert report["soft"].tolist() == [True, True, True, False, False]

    def test_rerun_gives_identical_metrics(self, generated, tmp_path):
        out = tmp_path / "again"
        args = ("--out", out, "--quiet", "--seed", "3", "train", generated, "--labels.strategy", "gls+bcl",
                "--train.epochs", "2")
        assert run(*args) == 0
        first = (out / "metrics.json").read_bytes()
        assert run(*args) == 0
        assert (out / "metrics.json").read_bytes() == first

    def test_eval_exports_embeddings(self, generated, tmp_path):
        assert run("--out", tmp_path / "model", "--quiet", "train", generated, "--train.epochs", "2",
                   "--train.hidden", "8") == 0
        assert run("--out", tmp_path / "eval", "eval", tmp_path / "model" / "checkpoint.txt",
                   "--data.root", generated) == 0
        embeddings = pd.read_csv(tmp_path / "eval" / "embeddings.csv")
        assert list(embeddings.columns) == ["label"] + [f"e{i}" for i in range(1, 9)]
        assert len(embeddings) == 15
        metrics = json.loads((tmp_path / "eval" / "metrics.json").read_text())
        trained = json.loads((tmp_path / "model" / "metrics.json").read_text())
        assert metrics["accuracy"] == trained["test_accuracy"]
        model = load_checkpoint(tmp_path / "model" / "checkpoint.txt")
        data = load_feature_dataset(generated)
        assert evaluate(model, data.test_features, data.test_targets)[0] == metrics["accuracy"]

    def test_labels_export(self, toy_dataset, tmp_path):
        assert run("--out", tmp_path / "proto", "prototype", toy_dataset) == 0
        assert run("--out", tmp_path / "labels", "labels", tmp_path / "proto",
                   "--labels.strategy", "gls", "--labels.step", "3") == 0
        schedule = pd.read_csv(tmp_path / "labels" / "schedule.csv")
        assert schedule["epoch"].tolist() == [1, 2, 3, 4, 5]
        assert schedule["soft"].tolist() == [True, True, True, True, False]
        last_soft = pd.read_csv(tmp_path / "labels" / "labels_epoch_4.csv").to_numpy()
        assert np.diag(last_soft) == pytest.approx([0.99, 0.99], abs=1e-12)
        hard = pd.read_csv(tmp_path / "labels" / "labels_epoch_5.csv").to_numpy()
        assert hard.tolist() == [[1.0, 0.0], [0.0, 1.0]]


class TestBenchAndGradcheck:
    def test_duplicate_hard_rows(self, generated, tmp_path):
        out = tmp_path / "bench"
        assert run("--out", out, "--quiet", "bench", generated, "--bench.strategies", "hard,hard",
                   "--bench.seeds", "0", "--train.epochs", "2") == 0
        lines = (out / "bench.csv").read_text().splitlines()
        assert lines[0] == "strategy,runs,mean,std,delta_vs_hard,wins,losses,sign_test_p"
        table = pd.read_csv(out / "bench.csv")
        assert table["delta_vs_hard"].tolist() == [0.0, 0.0]
        assert table["std"].isna().all()

    def test_table_aggregates_run_metrics(self, generated, tmp_path):
        out = tmp_path / "bench"
        assert run("--out", out, "--quiet", "bench", generated, "--bench.strategies", "hard,gls+bcl",
                   "--bench.seeds", "0,1", "--train.epochs", "2") == 0
        table = pd.read_csv(out / "bench.csv", float_precision="round_trip")
        runs = [json.loads((out / "runs" / "01_gls+bcl" / f"seed_{s}" / "metrics.json").read_text())
                for s in (0, 1)]
        assert table["mean"][1] == pytest.approx(np.mean([r["test_accuracy"] for r in runs]), abs=1e-15)
        assert table["runs"].tolist() == [2, 2]

    def test_gradcheck_outputs(self, tmp_path):
        out = tmp_path / "grad"
        assert run("--out", out, "--quiet", "gradcheck") == 0
        cases = pd.read_csv(out / "gradcheck_cases.csv")
        assert len(cases) == 34
        assert cases["worst"].max() < 1e-4
        summary = pd.read_csv(out / "gradcheck_summary.csv")
        assert set(summary["axis"]) == {"strategy", "indexing", "similarity", "reduction"}


class TestErrors:
    def test_missing_dataset(self, tmp_path, capsys):
        assert run("--out", tmp_path / "o", "stats", tmp_path / "nowhere") == 1
        assert "error:" in capsys.readouterr().err

    def test_stats_needs_root(self, tmp_path):
        assert run("--out", tmp_path / "o", "stats") == 1

    def test_unknown_config_key(self, tmp_path):
        assert run("--out", tmp_path / "o", "gradcheck", "--gradcheck.bogus", "1") == 1

    def test_prototype_class_mismatch(self, generated, toy_dataset, tmp_path):
        assert run("--out", tmp_path / "proto", "prototype", toy_dataset) == 0
        assert run("--out", tmp_path / "o", "--quiet", "train", generated, "--labels.strategy", "gls",
                   "--prototype.archive", tmp_path / "proto", "--train.epochs", "1") == 1


@pytest.mark.slow
def test_desk_scale_benchmark(tmp_path):
    """Default confusable benchmark: GLS beats hard labels across 10 seeds"""
    out = tmp_path / "bench"
    assert run("--out", out, "--quiet", "bench", "--bench.strategies", "hard,lsr,gls,gls+bcl") == 0
    table = pd.read_csv(out / "bench.csv").set_index("strategy")
    assert table.loc["gls", "mean"] > table.loc["hard", "mean"]
    assert table.loc["gls", "sign_test_p"] < 0.05
    assert table.loc["gls+bcl", "mean"] >= table.loc["gls", "mean"]
    assert table.loc["gls", "mean"] >= table.loc["lsr", "mean"]
