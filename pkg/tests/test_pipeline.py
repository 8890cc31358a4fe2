"""Tests for the end-to-end experiment protocol and its config parsing."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qubosvm import (
    BlobSpec,
    Dataset,
    ExperimentSpec,
    GridPoint,
    PressureProfileSpec,
    detect_task,
    grid_search,
    load_config,
    run_experiment,
    spec_from_options,
)


def blob_spec(**overrides):
    defaults = dict(
        synthetic=BlobSpec(centers=((-5.0, 0.0), (5.0, 0.0)), counts=(12, 12)),
        num_shuffles=2,
        train_fraction=0.75,
        sampler="anneal",
        sweeps=40,
        num_reads=4,
        seed=0,
    )
    defaults.update(overrides)
    return ExperimentSpec(**defaults)


class TestDetectTask:
    def test_binary(self):
        data = Dataset([[0.0], [1.0]], [-1, 1])
        assert detect_task(data) == ("binary", (-1, 1))

    def test_multiclass(self):
        data = Dataset([[0.0], [1.0], [2.0]], [0, 1, 2])
        assert detect_task(data) == ("multiclass", (0, 1, 2))

    def test_two_non_negative_classes_are_multiclass(self):
        data = Dataset([[0.0], [1.0]], [0, 1])
        assert detect_task(data) == ("multiclass", (0, 1))

    def test_rejects_single_class(self):
        data = Dataset([[0.0], [1.0]], [1, 1])
        with pytest.raises(ValueError, match="at least 2"):
            detect_task(data)

    def test_rejects_mixed_negative_ids(self):
        data = Dataset([[0.0], [1.0], [2.0]], [-1, 1, 2])
        with pytest.raises(ValueError, match="neither binary"):
            detect_task(data)


class TestExperimentSpec:
    def test_requires_exactly_one_source(self):
        with pytest.raises(ValueError, match="exactly one"):
            ExperimentSpec()
        with pytest.raises(ValueError, match="exactly one"):
            ExperimentSpec(
                data_path="x.csv",
                synthetic=BlobSpec(centers=((0.0,),), counts=(2,)),
            )

    def test_grid_product_order(self):
        spec = blob_spec(
            base_grid=(2, 3),
            bits_grid=(1,),
            penalty_grid=(0.0,),
            gamma_grid=(0.5, 1.0),
        )
        grid = spec.grid()
        assert grid == (
            GridPoint(2, 1, 0.0, 0.5),
            GridPoint(2, 1, 0.0, 1.0),
            GridPoint(3, 1, 0.0, 0.5),
            GridPoint(3, 1, 0.0, 1.0),
        )

    def test_train_config_carries_grid_point(self):
        spec = blob_spec()
        config = spec.train_config(GridPoint(3, 2, 1.5, 0.7), seed=42)
        assert config.encoding.base == 3
        assert config.encoding.bits_per_alpha == 2
        assert config.encoding.penalty == 1.5
        assert config.encoding.kernel.gamma == 0.7
        assert config.schedule.seed == 42
        assert config.schedule.sweeps == 40

    def test_validation(self):
        with pytest.raises(ValueError, match="pca_policy"):
            blob_spec(pca_policy="global")
        with pytest.raises(ValueError, match="num_shuffles"):
            blob_spec(num_shuffles=0)
        with pytest.raises(ValueError, match="base_grid"):
            blob_spec(base_grid=())


class TestRunExperiment:
    def test_binary_end_to_end(self):
        result = run_experiment(blob_spec())
        assert result.task == "binary"
        assert result.class_ids == (-1, 1)
        assert result.num_train == 18
        assert result.num_test == 6
        assert len(result.qsvm_accuracies) == 2
        assert len(result.classical_accuracies) == 2
        # well-separated blobs: both classifiers should be perfect
        assert result.qsvm_mean == 1.0
        assert result.classical_mean == 1.0
        assert result.qsvm_adjacency is None
        for cm in result.qsvm_confusions:
            assert cm.shape == (2, 2)
            assert cm.sum() == 6

    def test_deterministic(self):
        a = run_experiment(blob_spec(seed=5))
        b = run_experiment(blob_spec(seed=5))
        assert a.qsvm_accuracies == b.qsvm_accuracies
        assert a.classical_accuracies == b.classical_accuracies
        assert a.chosen == b.chosen
        for ca, cb in zip(a.qsvm_confusions, b.qsvm_confusions):
            assert np.array_equal(ca, cb)

    def test_multiclass_with_pca(self):
        spec = ExperimentSpec(
            synthetic=PressureProfileSpec(num_classes=3, counts=8, taps=6, noise=0.02),
            pca_dim=2,
            num_shuffles=2,
            train_fraction=0.7,
            sampler="anneal",
            sweeps=60,
            num_reads=4,
            bits_grid=(1,),
            gamma_grid=(0.5,),
            seed=1,
        )
        result = run_experiment(spec)
        assert result.task == "multiclass"
        assert result.class_ids == (0, 1, 2)
        assert result.qsvm_adjacency is not None
        assert len(result.qsvm_adjacency) == 2
        for cm in result.qsvm_confusions:
            assert cm.shape == (3, 3)
        for adjacent, distant in result.qsvm_adjacency:
            total_errors = sum(int(cm.sum() - np.trace(cm))
                               for cm in result.qsvm_confusions)
            assert adjacent + distant <= total_errors

    def test_single_shuffle_zero_std(self):
        result = run_experiment(blob_spec(num_shuffles=1))
        assert result.qsvm_std == 0.0
        assert result.classical_std == 0.0

    def test_csv_data_path(self, tmp_path):
        from qubosvm import generate_synthetic, save_csv

        data = generate_synthetic(
            BlobSpec(centers=((-4.0, 0.0), (4.0, 0.0)), counts=(10, 10)), seed=3
        )
        path = tmp_path / "blobs.csv"
        save_csv(data, path)
        spec = blob_spec(synthetic=None, data_path=str(path))
        result = run_experiment(spec)
        assert result.task == "binary"
        assert result.num_train + result.num_test == 20

    def test_bias_adjust_runs(self):
        result = run_experiment(blob_spec(bias_adjust=True, adjust_radius=0.5,
                                          adjust_step=0.1))
        assert result.qsvm_mean == 1.0

    def test_pca_policies_differ_only_in_fit_scope(self):
        spec_train = ExperimentSpec(
            synthetic=PressureProfileSpec(num_classes=2, counts=10, taps=5, noise=0.05),
            pca_dim=2,
            pca_policy="train",
            num_shuffles=1,
            train_fraction=0.7,
            sampler="anneal",
            sweeps=40,
            num_reads=4,
            bits_grid=(1,),
            seed=2,
        )
        result_train = run_experiment(spec_train)
        import dataclasses

        spec_pooled = dataclasses.replace(spec_train, pca_policy="pooled")
        result_pooled = run_experiment(spec_pooled)
        assert result_train.task == result_pooled.task == "binary"
        assert result_train.num_train == result_pooled.num_train


class TestGridSearch:
    def test_single_point_short_circuit(self):
        spec = blob_spec()
        point = grid_search(spec, [])
        assert point == GridPoint(2, 2, 0.0, 1.0)

    def test_picks_better_gamma(self):
        # concentric circles: with a near-constant kernel (gamma 1e-9) the
        # class means coincide and training accuracy is 0.5, while gamma 1.0
        # separates the rings perfectly
        angles = np.linspace(0, 2 * np.pi, 6, endpoint=False)
        inner = 0.5 * np.column_stack([np.cos(angles), np.sin(angles)])
        outer = 3.0 * np.column_stack([np.cos(angles + 0.3), np.sin(angles + 0.3)])
        train = Dataset(np.vstack([inner, outer]), [1] * 6 + [-1] * 6)
        spec = blob_spec(
            sampler="exhaustive",
            bits_grid=(1,),
            gamma_grid=(1e-9, 1.0),
            num_shuffles=1,
        )
        chosen = grid_search(spec, [train])
        assert chosen.gamma == 1.0

    def test_tie_keeps_earliest(self):
        # both gammas classify the trivial data perfectly -> first one wins
        rng = np.random.default_rng(6)
        features = np.vstack([
            rng.normal(loc=(-5.0, 0.0), scale=0.2, size=(6, 2)),
            rng.normal(loc=(5.0, 0.0), scale=0.2, size=(6, 2)),
        ])
        train = Dataset(features, [-1] * 6 + [1] * 6)
        spec = blob_spec(sampler="exhaustive", bits_grid=(1,),
                         gamma_grid=(0.5, 1.0), num_shuffles=1)
        chosen = grid_search(spec, [train])
        assert chosen.gamma == 0.5


class TestLoadConfig:
    def test_parses_keys_comments_blanks(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text(
            "# experiment\n"
            "\n"
            "synthetic = blobs\n"
            "blob_counts = 12, 12  # per class\n"
            "seed = 7\n"
        )
        options = load_config(path)
        assert options == {"synthetic": "blobs", "blob_counts": "12, 12", "seed": "7"}

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("seed = 1\nseed = 2\n")
        with pytest.raises(ValueError, match="line 2: duplicate key 'seed'"):
            load_config(path)

    def test_missing_equals_rejected(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("seed 1\n")
        with pytest.raises(ValueError, match="line 1: expected 'key = value'"):
            load_config(path)

    def test_empty_key_rejected(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("= 3\n")
        with pytest.raises(ValueError, match="empty key"):
            load_config(path)


class TestSpecFromOptions:
    def test_blob_synthetic(self):
        spec = spec_from_options({
            "synthetic": "blobs",
            "blob_centers": "-5,0; 5,0",
            "blob_counts": "30, 30",
            "blob_spread": "0.5",
            "num_shuffles": "3",
            "train_fraction": "0.6667",
            "gamma_grid": "1.0",
            "seed": "11",
        })
        assert isinstance(spec.synthetic, BlobSpec)
        assert spec.synthetic.centers == ((-5.0, 0.0), (5.0, 0.0))
        assert spec.synthetic.counts == (30, 30)
        assert spec.num_shuffles == 3
        assert spec.seed == 11

    def test_profile_synthetic(self):
        spec = spec_from_options({
            "synthetic": "profiles",
            "profile_classes": "4",
            "profile_counts": "18, 18, 18, 9",
            "profile_taps": "6",
            "pca_dim": "3",
            "base_grid": "4",
            "bits_grid": "3",
        })
        assert isinstance(spec.synthetic, PressureProfileSpec)
        assert spec.synthetic.num_classes == 4
        assert spec.synthetic.counts == (18, 18, 18, 9)
        assert spec.pca_dim == 3
        assert spec.base_grid == (4,)
        assert spec.bits_grid == (3,)

    def test_data_path(self):
        spec = spec_from_options({"data_path": "some/file.csv"})
        assert spec.data_path == "some/file.csv"
        assert spec.synthetic is None

    def test_bool_parsing(self):
        spec = spec_from_options({
            "data_path": "x.csv",
            "standardize": "true",
            "bias_adjust": "no",
        })
        assert spec.standardize is True
        assert spec.bias_adjust is False

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys: colour, flavor"):
            spec_from_options({"data_path": "x.csv", "flavor": "a", "colour": "b"})

    def test_unparsable_value_names_key(self):
        with pytest.raises(ValueError, match="config key 'seed': cannot parse 'abc'"):
            spec_from_options({"data_path": "x.csv", "seed": "abc"})

    def test_missing_required_synthetic_key(self):
        with pytest.raises(ValueError, match="'blob_centers' is required"):
            spec_from_options({"synthetic": "blobs", "blob_counts": "2,2"})

    def test_unknown_synthetic_kind(self):
        with pytest.raises(ValueError, match="expected 'blobs' or 'profiles'"):
            spec_from_options({"synthetic": "spirals"})

    def test_grid_lists(self):
        spec = spec_from_options({
            "data_path": "x.csv",
            "base_grid": "2, 3, 4",
            "penalty_grid": "0.0, 1.0",
            "gamma_grid": "0.1, 0.27, 1.0",
        })
        assert spec.base_grid == (2, 3, 4)
        assert spec.penalty_grid == (0.0, 1.0)
        assert spec.gamma_grid == (0.1, 0.27, 1.0)
