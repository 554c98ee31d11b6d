import numpy as np
import pytest

from fairrank.data import (
    PROTECTED_COL,
    DatasetError,
    SyntheticSpec,
    TaskDataset,
    generate_synthetic,
    load_csv,
    split_folds,
    standardize,
    write_csv,
)
from fairrank.fixtures import fixture_path, fixture_target_col
from fairrank.metrics import auc


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_minimal_file(self, tmp_path):
        path = write(
            tmp_path,
            "task_id,protected,target,f1\n"
            "1,x,0.5,1.0\n"
            "1,y,0.7,2.0\n"
            "1,x,0.9,3.0\n",
        )
        data = load_csv(path)
        assert (data.k, data.h, data.n) == (1, 3, 2)
        # lexicographically smaller protected value becomes partition A
        assert data.label_names == {"A": "x", "B": "y"}
        assert data.features[0, 0, PROTECTED_COL] == 1.0
        assert data.features[0, 1, PROTECTED_COL] == 0.0

    def test_partition_override(self, tmp_path):
        path = write(
            tmp_path,
            "task_id,protected,target,f1\n1,x,0.5,1.0\n1,y,0.7,2.0\n",
        )
        data = load_csv(path, partition_a="y")
        assert data.label_names == {"A": "y", "B": "x"}

    def test_non_binary_protected(self, tmp_path):
        path = write(
            tmp_path,
            "task_id,protected,target,f1\n1,x,0.5,1\n1,y,0.7,2\n1,z,0.9,3\n",
        )
        with pytest.raises(DatasetError, match="protected column not binary"):
            load_csv(path)

    def test_ragged_tasks_rejected(self, tmp_path):
        path = write(
            tmp_path,
            "task_id,protected,target,f1\n1,x,0.5,1\n1,y,0.7,2\n2,x,0.9,3\n",
        )
        with pytest.raises(DatasetError, match="task '2' has 1 rows; expected 2"):
            load_csv(path)

    def test_unparsable_cell_reports_location(self, tmp_path):
        path = write(
            tmp_path,
            "task_id,protected,target,f1\n1,x,0.5,oops\n1,y,0.7,2\n",
        )
        with pytest.raises(DatasetError, match="row 2, column 'f1'"):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="cannot read"):
            load_csv(tmp_path / "absent.csv")

    def test_bundled_fixture_shape_and_flat_index(self):
        data = load_csv(fixture_path("crime_sample"), target_col="crime_rate")
        assert (data.k, data.h, data.n) == (4, 25, 5)
        # flat index is task-major, row-minor
        assert data.flat_index(0, 7) == 7
        assert data.flat_index(2, 7) == 2 * 25 + 7

    @pytest.mark.parametrize(
        "name", ["crime_sample", "income_sample", "wine_sample", "student_sample"]
    )
    def test_all_fixtures_load(self, name):
        data = load_csv(fixture_path(name), target_col=fixture_target_col(name))
        n_a, n_b = data.partition_sizes()
        assert n_a >= 1 and n_b >= 1
        assert data.n_instances == 100

    def test_roundtrip_write_load(self, tmp_path):
        original = generate_synthetic(SyntheticSpec(alpha=0.8, k=3, h=7, seed=5))
        path = tmp_path / "roundtrip.csv"
        write_csv(original, path)
        loaded = load_csv(path)
        np.testing.assert_array_equal(loaded.features, original.features)
        np.testing.assert_array_equal(loaded.targets, original.targets)
        np.testing.assert_array_equal(loaded.protected, original.protected)


class TestStandardize:
    def test_two_point_column(self):
        feats = np.array([[[1.0, 2.0]], [[1.0, 4.0]]])  # k=2, h=1, n=2
        targs = np.array([[2.0], [4.0]])
        data = TaskDataset(
            features=feats,
            targets=targs,
            protected=np.array(["A", "B"]),
            label_names={"A": "A", "B": "B"},
            task_ids=("0", "1"),
        )
        std, params = standardize(data)
        # population sd of [2, 4] is 1, mean 3
        np.testing.assert_allclose(std.features[:, :, 1].ravel(), [-1.0, 1.0])
        np.testing.assert_allclose(std.targets.ravel(), [-1.0, 1.0])
        assert params.target_mean == 3.0
        assert params.target_sd == 1.0

    def test_columns_zero_mean_unit_variance(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.7, k=10, h=20, seed=2))
        std, _ = standardize(data)
        flat = std.flat_features()
        for col in range(1, data.n):
            assert abs(flat[:, col].mean()) < 1e-10
            assert abs(flat[:, col].var() - 1.0) < 1e-8
        assert abs(std.flat_targets().mean()) < 1e-10

    def test_protected_column_untouched(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.7, k=5, h=10, seed=3))
        std, params = standardize(data)
        np.testing.assert_array_equal(
            std.features[..., PROTECTED_COL], data.features[..., PROTECTED_COL]
        )
        assert not params.feature_constant[PROTECTED_COL]

    def test_idempotent_on_standardized(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.7, k=5, h=10, seed=4))
        std1, _ = standardize(data)
        std2, _ = standardize(std1)
        np.testing.assert_allclose(std2.features, std1.features, atol=1e-8)

    def test_constant_column_flagged(self):
        feats = np.zeros((1, 3, 2))
        feats[0, :, 1] = 5.0
        data = TaskDataset(
            features=feats,
            targets=np.array([[1.0, 2.0, 3.0]]),
            protected=np.array(["A", "A", "B"]),
            label_names={"A": "A", "B": "B"},
            task_ids=("0",),
        )
        std, params = standardize(data)
        assert params.feature_constant[1]
        np.testing.assert_array_equal(std.features[0, :, 1], [0.0, 0.0, 0.0])

    def test_target_roundtrip(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.8, k=8, h=15, seed=6))
        std, params = standardize(data)
        recovered = params.inverse_targets(std.flat_targets())
        np.testing.assert_allclose(recovered, data.flat_targets(), rtol=1e-8)

    def test_feature_roundtrip(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.8, k=8, h=15, seed=7))
        std, params = standardize(data)
        recovered = params.inverse_features(std.flat_features())
        np.testing.assert_allclose(recovered, data.flat_features(), rtol=1e-8, atol=1e-10)


class TestGenerateSynthetic:
    def test_shapes_and_uniform_labels(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.9, k=40, h=25, seed=1))
        assert data.n_instances == 1000
        assert (data.k, data.h, data.n) == (40, 25, 5)
        n_a, n_b = data.partition_sizes()
        assert 400 < n_a < 600  # uniform labels at N=1000

    def test_target_auc_near_alpha(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.9, k=40, h=25, seed=1))
        value = auc(data.flat_targets(), data.protected)
        assert 0.87 <= value <= 0.93

    def test_alpha_near_half_gives_random_ranks(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.5001, k=40, h=25, seed=2))
        value = auc(data.flat_targets(), data.protected)
        assert 0.45 <= value <= 0.55

    def test_deterministic_for_seed(self):
        a = generate_synthetic(SyntheticSpec(alpha=0.7, seed=9))
        b = generate_synthetic(SyntheticSpec(alpha=0.7, seed=9))
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.targets, b.targets)

    def test_seed_changes_values_not_shape(self):
        a = generate_synthetic(SyntheticSpec(alpha=0.7, seed=1))
        b = generate_synthetic(SyntheticSpec(alpha=0.7, seed=2))
        assert (a.k, a.h, a.n) == (b.k, b.h, b.n)
        assert not np.array_equal(a.targets, b.targets)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            SyntheticSpec(alpha=0.5)
        with pytest.raises(ValueError):
            SyntheticSpec(alpha=1.0)

    def test_mean_auc_over_many_seeds(self):
        # law of large numbers over seeds at a modest instance size
        vals = []
        for seed in range(200):
            data = generate_synthetic(SyntheticSpec(alpha=0.7, k=8, h=25, seed=seed))
            vals.append(auc(data.flat_targets(), data.protected))
        assert abs(np.mean(vals) - 0.7) < 0.02


class TestSplitFolds:
    def test_one_row_per_task_per_fold(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.8, k=5, h=10, seed=1))
        folds = split_folds(data, 10, seed=0)
        assert len(folds) == 10
        for _, val in folds:
            assert val.size == data.k
            tasks = val // data.h
            assert sorted(tasks.tolist()) == list(range(data.k))

    def test_two_fold_sizes_balanced(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.8, k=3, h=25, seed=2))
        folds = split_folds(data, 2, seed=0)
        sizes = sorted(val.size // data.k for _, val in folds)
        assert sizes == [12, 13]

    def test_validation_sets_partition_instances(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.8, k=4, h=12, seed=3))
        folds = split_folds(data, 4, seed=1)
        seen = np.concatenate([val for _, val in folds])
        assert sorted(seen.tolist()) == list(range(data.n_instances))
        for train, val in folds:
            assert np.intersect1d(train, val).size == 0

    def test_single_class_data_rejected(self):
        feats = np.zeros((1, 4, 2))
        data = TaskDataset(
            features=feats,
            targets=np.zeros((1, 4)),
            protected=np.array(["A"] * 4),
            label_names={"A": "A", "B": "B"},
            task_ids=("0",),
        )
        with pytest.raises(DatasetError, match="fold 0"):
            split_folds(data, 2, seed=0)

    def test_too_many_folds(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.8, k=2, h=5, seed=1))
        with pytest.raises(ValueError, match="exceeds"):
            split_folds(data, 6, seed=0)

    def test_subset_recovers_fold_rows(self):
        data = generate_synthetic(SyntheticSpec(alpha=0.8, k=3, h=10, seed=5))
        train, val = split_folds(data, 5, seed=2)[0]
        sub = data.subset(train)
        assert sub.k == data.k
        assert sub.h == 8
        np.testing.assert_array_equal(sub.flat_targets(), data.flat_targets()[train])
