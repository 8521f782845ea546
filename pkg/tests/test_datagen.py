import numpy as np
import pytest

from config import Config
from src.datagen import (
    ClassProfile,
    analytic_presence,
    load_feature_dataset,
    make_confusable_profiles,
    nearest_centroid_confusion,
    oracle_prototype,
    overlap_matrix,
    parse_pair_specs,
    read_feature_csv,
    region_grid,
    sample_dataset,
    sample_label_map,
    write_dataset,
    write_feature_csv,
)
from src.errors import GeometryError, IngestionError, ProfileSpecError
from src.label_softening import GlsLabels, sigma0_of
from src.prototype import CorrelationMetric, build_prototype, cosine_correlation, euclidean_correlation
from src.semantic_stats import read_manifest, summarize_dataset, summarize_label_maps


def profile(occurrence, regions=1, name="a", class_id=1):
    return ClassProfile(class_id=class_id, class_name=name, occurrence=np.asarray(occurrence), regions=regions)


class TestProfiles:
    def test_no_shared_mass_gives_disjoint_supports(self):
        a, b = make_confusable_profiles(2, 6, [(0, 1, 0.0)], seed=1)
        assert not ((a.occurrence > 0) & (b.occurrence > 0)).any()

    def test_full_shared_mass_gives_identical_profiles(self):
        a, b = make_confusable_profiles(2, 6, [(0, 1, 1.0)], seed=1)
        assert np.array_equal(a.occurrence, b.occurrence)

    def test_seven_classes_two_pairs(self):
        profiles = make_confusable_profiles(7, 30, parse_pair_specs(["1-2:0.8", "3-4:0.8"]), seed=0)
        expected = np.eye(7)
        expected[0, 1] = expected[1, 0] = 0.8
        expected[2, 3] = expected[3, 2] = 0.8
        assert np.max(np.abs(overlap_matrix(profiles) - expected)) <= 1e-12
        assert [p.class_name for p in profiles][:2] == ["scene_01", "scene_02"]

    def test_background_mass_is_shared_by_every_pair(self):
        profiles = make_confusable_profiles(7, 30, parse_pair_specs(Config.GEN_PAIRS), seed=0, background=0.05)
        expected = np.full((7, 7), 0.05)
        np.fill_diagonal(expected, 1.0)
        for a, b, fraction in parse_pair_specs(Config.GEN_PAIRS):
            expected[a, b] = expected[b, a] = fraction
        assert np.max(np.abs(overlap_matrix(profiles) - expected)) <= 1e-12

    def test_pair_fraction_below_background(self):
        with pytest.raises(ProfileSpecError):
            make_confusable_profiles(3, 9, [(0, 1, 0.02)], background=0.05)

    @pytest.mark.parametrize("metric", list(CorrelationMetric))
    def test_default_benchmark_profiles_keep_gls_soft(self, metric):
        profiles = make_confusable_profiles(
            Config.GEN_CLASSES, Config.GEN_LABELS, parse_pair_specs(Config.GEN_PAIRS), seed=0,
            regions=Config.GEN_REGIONS, background=Config.GEN_BACKGROUND,
        )
        matrix = oracle_prototype(profiles, metric=metric).matrix
        assert sigma0_of(matrix) < Config.CONFIDENCE_CAP
        strategy = GlsLabels(matrix)
        assert strategy.schedule is not None
        first = strategy.labels_for_epoch(1)
        assert first.soft
        assert first.labels.has_dominant_diagonal()

    def test_shared_mass_above_one(self):
        with pytest.raises(ProfileSpecError, match="Class 1"):
            make_confusable_profiles(3, 9, [(0, 1, 0.7), (0, 2, 0.5)])

    def test_too_few_labels(self):
        with pytest.raises(ProfileSpecError):
            make_confusable_profiles(3, 2)

    def test_pair_spec_parsing(self):
        assert parse_pair_specs(["1-2:0.8", "3-5:0.25"]) == [(0, 1, 0.8), (2, 4, 0.25)]
        with pytest.raises(ProfileSpecError, match="Malformed"):
            parse_pair_specs(["1:2-0.8x"])

    def test_invalid_probabilities(self):
        with pytest.raises(ProfileSpecError):
            profile([0.5, 0.6])


class TestSampleLabelMap:
    def test_single_region_is_constant(self):
        label_map = sample_label_map(profile([0.2, 0.3, 0.5]), 6, 4, seed=3)
        assert np.unique(label_map.labels).size == 1
        assert (label_map.width, label_map.height) == (6, 4)

    def test_deterministic_per_seed(self):
        p = profile([0.25] * 4, regions=4)
        assert sample_label_map(p, 4, 4, [1, 2]) == sample_label_map(p, 4, 4, [1, 2])

    def test_region_frequencies_match_profile(self):
        occurrence = np.array([0.4, 0.3, 0.2, 0.1])
        p = profile(occurrence, regions=4)
        counts = np.zeros(4)
        for n in range(10000):
            regions = sample_label_map(p, 4, 4, [5, n]).labels[::2, ::2]
            counts += np.bincount(regions.ravel() - 1, minlength=4)
        assert np.max(np.abs(counts / counts.sum() - occurrence)) <= 0.02

    def test_indivisible_geometry(self):
        with pytest.raises(GeometryError):
            sample_label_map(profile([0.5, 0.5], regions=3), 4, 4, seed=0)

    def test_region_grid_closest_to_square(self):
        assert region_grid(12, 24, 24) == (3, 4)
        assert region_grid(4, 4, 4) == (2, 2)


class TestOracles:
    def test_single_region_presence_is_occurrence(self):
        occurrence = [0.2, 0.3, 0.5]
        assert analytic_presence(profile(occurrence)) == pytest.approx(occurrence, abs=1e-15)

    def test_two_regions(self):
        assert analytic_presence(profile([0.5, 0.5, 0.0], regions=2)).tolist() == [0.75, 0.75, 0.0]

    def test_identical_profiles(self):
        a, b = make_confusable_profiles(2, 8, [(0, 1, 1.0)], seed=2)
        for metric in CorrelationMetric:
            assert oracle_prototype([a, b], metric=metric).matrix[0, 1] == 1.0

    def test_disjoint_profiles(self):
        profiles = make_confusable_profiles(2, 8, seed=2)
        assert oracle_prototype(profiles).matrix[0, 1] == 0.0

    @pytest.mark.parametrize("metric", list(CorrelationMetric))
    def test_composes_correlations_of_presence(self, metric):
        profiles = make_confusable_profiles(4, 16, [(0, 1, 0.6), (1, 2, 0.3)], seed=5)
        vectors = [analytic_presence(p) for p in profiles]
        correlate = cosine_correlation if metric is CorrelationMetric.COSINE else euclidean_correlation
        matrix = oracle_prototype(profiles, metric=metric).matrix
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert matrix[i, j] == pytest.approx(correlate(vectors[i], vectors[j]), abs=1e-12)

    def test_needs_two_profiles(self):
        with pytest.raises(ProfileSpecError):
            oracle_prototype([profile([1.0])])


class TestSampleDataset:
    def test_noiseless_single_region_features_are_one_hot(self):
        profiles = make_confusable_profiles(3, 6, [(0, 1, 0.5)], seed=0, regions=1)
        dataset = sample_dataset(profiles, per_class=6, width=4, height=4, noise=0.0, distractors=0, seed=1)
        assert dataset.features.shape == (18, 6)
        assert (dataset.features.max(axis=1) == 1.0).all()
        assert (dataset.features.sum(axis=1) == 1.0).all()

    def test_half_split(self):
        profiles = make_confusable_profiles(3, 9, seed=0)
        dataset = sample_dataset(profiles, per_class=10, width=24, height=24, train_fraction=0.5, seed=2)
        for c in range(3):
            assert (dataset.targets[dataset.train_rows] == c).sum() == 5
            assert (dataset.targets[dataset.test_rows] == c).sum() == 5
        rows = np.concatenate([dataset.train_rows, dataset.test_rows])
        assert sorted(rows.tolist()) == list(range(30))

    def test_distractor_columns(self):
        profiles = make_confusable_profiles(2, 6, seed=0)
        dataset = sample_dataset(profiles, per_class=4, width=24, height=24, distractors=3, seed=0)
        assert dataset.features.shape[1] == 9
        assert np.isfinite(dataset.features).all()

    def test_reproducible(self):
        profiles = make_confusable_profiles(3, 9, [(0, 1, 0.8)], seed=0)
        a = sample_dataset(profiles, per_class=8, seed=4)
        b = sample_dataset(profiles, per_class=8, seed=4)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.train_rows, b.train_rows)

    def test_needs_two_instances(self):
        with pytest.raises(ProfileSpecError):
            sample_dataset(make_confusable_profiles(2, 4), per_class=1)

    def test_statistics_converge_to_oracle(self):
        profiles = [
            profile([0.25, 0.25, 0.25, 0.25, 0.0, 0.0], regions=12, name="a", class_id=1),
            profile([0.0, 0.0, 0.25, 0.25, 0.25, 0.25], regions=12, name="b", class_id=2),
        ]
        dataset = sample_dataset(profiles, per_class=2000, width=12, height=12, noise=0.0, distractors=0, seed=0)
        summary = summarize_label_maps([(n, list(m)) for n, m in zip(dataset.class_names, dataset.maps)], 6)
        for rep, p in zip(summary.representations, profiles):
            assert rep.instance_count == 2000
            assert np.max(np.abs(rep.values - analytic_presence(p))) <= 0.03
        for metric in CorrelationMetric:
            sampled = build_prototype(summary, metric).matrix
            assert np.max(np.abs(sampled - oracle_prototype(profiles, metric=metric).matrix)) <= 0.05

    def test_overlap_drives_nearest_centroid_confusion(self):
        profiles = make_confusable_profiles(4, 20, [(0, 1, 0.9), (2, 3, 0.1)], seed=3)
        dataset = sample_dataset(profiles, per_class=200, seed=3)
        confusion = nearest_centroid_confusion(dataset)
        assert confusion[0, 1] + confusion[1, 0] > confusion[2, 3] + confusion[3, 2]
        assert confusion.sum(axis=1) == pytest.approx(np.ones(4))


def small_dataset(seed=9):
    profiles = make_confusable_profiles(3, 8, [(0, 1, 0.5)], seed=0, regions=4)
    return sample_dataset(profiles, per_class=6, width=8, height=8, seed=seed)


class TestDatasetOnDisk:
    @pytest.fixture
    def dataset(self):
        return small_dataset()

    def test_disk_statistics_match_memory(self, tmp_path, dataset):
        write_dataset(dataset, tmp_path / "gen")
        everything = summarize_label_maps([(n, list(m)) for n, m in zip(dataset.class_names, dataset.maps)], 8)
        assert np.array_equal(summarize_dataset(tmp_path / "gen").matrix(), everything.matrix())
        on_disk_train = summarize_dataset(tmp_path / "gen", split="train")
        assert np.array_equal(on_disk_train.matrix(), dataset.summary("train").matrix())

    def test_manifest_counts(self, tmp_path, dataset):
        write_dataset(dataset, tmp_path / "gen")
        manifest = read_manifest(tmp_path / "gen")
        assert manifest.L == 8
        assert manifest.classes == (("scene_01", 6), ("scene_02", 6), ("scene_03", 6))

    def test_regeneration_is_byte_identical(self, tmp_path, dataset):
        write_dataset(dataset, tmp_path / "a")
        write_dataset(small_dataset(), tmp_path / "b")
        files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_feature_files_round_trip(self, tmp_path, dataset):
        write_dataset(dataset, tmp_path / "gen")
        loaded = load_feature_dataset(tmp_path / "gen")
        expected = dataset.to_feature_dataset()
        assert np.array_equal(loaded.train_features, expected.train_features)
        assert np.array_equal(loaded.test_targets, expected.test_targets)
        assert loaded.class_names == dataset.class_names

    def test_feature_csv_header(self, tmp_path):
        path = write_feature_csv(tmp_path / "f.csv", np.array([[0.5, 0.25]]), np.array([2]))
        assert path.read_text().splitlines() == ["label,f1,f2", "3,0.5,0.25"]
        features, targets = read_feature_csv(path)
        assert targets.tolist() == [2]

    def test_feature_csv_errors(self, tmp_path):
        with pytest.raises(IngestionError, match="not found"):
            read_feature_csv(tmp_path / "missing.csv")
        bad = tmp_path / "bad.csv"
        bad.write_text("class,x1\n1,0.5\n")
        with pytest.raises(IngestionError, match="header"):
            read_feature_csv(bad)
