"""Tests for sampled and classical binary SVM training.

Oracles: the bias formula is transcribed directly; sampled training with the
exhaustive solver is checked against an argmin over all decoded coefficient
vectors; the classical solver is pinned on a two-point instance whose exact
solution (alphas 0.5, bias 0) is reachable in floating point.
"""

import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qubosvm import (
    AnnealSchedule,
    BinaryModel,
    Dataset,
    EncodingParams,
    EnsembleModel,
    KernelParams,
    TrainConfig,
    adjust_bias,
    build_qubo,
    compute_bias,
    decision_function,
    decision_values,
    decode_alphas,
    ensemble_decision,
    ensemble_decision_values,
    kernel_matrix,
    kkt_violation,
    load_model,
    predict_labels,
    save_model,
    solve_exhaustive,
    train_binary,
    train_classical,
)
from qubosvm.svm import model_from_text, model_to_text


def random_binary_dataset(rng, n, d):
    features = rng.normal(size=(n, d))
    labels = rng.choice((-1, 1), size=n)
    if np.all(labels == labels[0]):
        labels[0] = -labels[0]
    return Dataset(features, labels)


def bias_oracle(alphas, data, kernel, c_bound):
    """Direct transcription of the weighted-average bias formula."""
    a = np.asarray(alphas, dtype=float)
    t = data.labels.astype(float)
    gram = kernel_matrix(kernel, data.features)
    num = 0.0
    den = 0.0
    for n in range(data.num_points):
        w = a[n] * (c_bound - a[n])
        num += w * (t[n] - sum(a[m] * t[m] * gram[m, n] for m in range(data.num_points)))
        den += w
    return num / den


def zero_alpha_model(bias, labels=(1, -1)):
    data = Dataset([[0.0], [1.0]], list(labels))
    return BinaryModel(
        alphas=np.zeros(2), bias=bias, data=data, kernel=KernelParams(), c_bound=3.0
    )


class TestComputeBias:
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_direct_transcription(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 8))
        data = random_binary_dataset(rng, n, 2)
        c = 3.0
        alphas = rng.uniform(0.2, c - 0.2, size=n)
        kernel = KernelParams(gamma=0.7)
        bias, degenerate = compute_bias(alphas, data, kernel, c)
        assert not degenerate
        assert_allclose(bias, bias_oracle(alphas, data, kernel, c), rtol=1e-12, atol=1e-12)

    def test_degenerate_when_all_alphas_at_edges(self):
        data = Dataset([[0.0], [1.0], [2.0], [3.0]], [1, -1, 1, -1])
        alphas = np.array([0.0, 3.0, 0.0, 3.0])
        bias, degenerate = compute_bias(alphas, data, KernelParams(), 3.0)
        assert bias == 0.0
        assert degenerate

    def test_length_mismatch(self):
        data = Dataset([[0.0], [1.0]], [1, -1])
        with pytest.raises(ValueError, match="alphas for"):
            compute_bias([1.0], data, KernelParams(), 3.0)


class TestBinaryModel:
    def test_alphas_frozen(self):
        model = zero_alpha_model(0.0)
        with pytest.raises(ValueError):
            model.alphas[0] = 1.0

    def test_rejects_out_of_box_alphas(self):
        data = Dataset([[0.0], [1.0]], [1, -1])
        with pytest.raises(ValueError, match="outside"):
            BinaryModel(np.array([4.0, 0.0]), 0.0, data, KernelParams(), 3.0)
        with pytest.raises(ValueError, match="outside"):
            BinaryModel(np.array([-0.5, 0.0]), 0.0, data, KernelParams(), 3.0)

    def test_rejects_single_class_data(self):
        data = Dataset([[0.0], [1.0]], [1, 1])
        with pytest.raises(ValueError, match="single-class"):
            BinaryModel(np.zeros(2), 0.0, data, KernelParams(), 3.0)

    def test_rejects_wrong_alpha_count(self):
        data = Dataset([[0.0], [1.0]], [1, -1])
        with pytest.raises(ValueError, match="training points"):
            BinaryModel(np.zeros(3), 0.0, data, KernelParams(), 3.0)


class TestDecision:
    def test_zero_decision_predicts_positive(self):
        model = zero_alpha_model(0.0)
        assert decision_function(model, np.array([5.0])) == 0.0
        assert list(predict_labels([0.0, -0.1, 0.1])) == [1, -1, 1]

    def test_bias_only_model(self):
        model = zero_alpha_model(-2.5)
        values = decision_values(model, np.array([[0.0], [9.0]]))
        assert_allclose(values, [-2.5, -2.5])

    def test_matches_manual_sum(self):
        rng = np.random.default_rng(1)
        data = random_binary_dataset(rng, 5, 3)
        alphas = rng.uniform(0.0, 2.0, size=5)
        kernel = KernelParams(gamma=0.5)
        model = BinaryModel(alphas, 0.3, data, kernel, 3.0)
        x = rng.normal(size=3)
        expected = 0.3 + sum(
            alphas[n]
            * data.labels[n]
            * np.exp(-0.5 * np.sum((data.features[n] - x) ** 2))
            for n in range(5)
        )
        assert_allclose(decision_function(model, x), expected, rtol=1e-12)

    def test_decision_values_requires_2d(self):
        with pytest.raises(ValueError, match="2-d"):
            decision_values(zero_alpha_model(0.0), np.zeros(3))


class TestEnsemble:
    def test_mean_identity(self):
        rng = np.random.default_rng(2)
        data = random_binary_dataset(rng, 6, 2)
        kernel = KernelParams(gamma=1.0)
        members = tuple(
            BinaryModel(rng.uniform(0, 3, size=6), rng.normal(), data, kernel, 3.0)
            for _ in range(5)
        )
        ensemble = EnsembleModel(members)
        X = rng.normal(size=(40, 2))
        mean = np.mean([decision_values(m, X) for m in members], axis=0)
        assert_allclose(ensemble_decision_values(ensemble, X), mean, atol=1e-12)
        assert_allclose(ensemble_decision(ensemble, X[0]), mean[0], atol=1e-12)

    def test_single_member_passthrough(self):
        model = zero_alpha_model(1.5)
        ensemble = EnsembleModel((model,))
        assert ensemble_decision(ensemble, np.array([0.0])) == 1.5

    def test_members_must_share_training_setup(self):
        rng = np.random.default_rng(3)
        data_a = random_binary_dataset(rng, 4, 2)
        data_b = random_binary_dataset(rng, 4, 2)
        kernel = KernelParams()
        a = BinaryModel(np.zeros(4), 0.0, data_a, kernel, 3.0)
        b = BinaryModel(np.zeros(4), 0.0, data_b, kernel, 3.0)
        with pytest.raises(ValueError, match="share training data"):
            EnsembleModel((a, b))
        c = BinaryModel(np.zeros(4), 0.0, data_a, kernel, 7.0)
        with pytest.raises(ValueError, match="share training data"):
            EnsembleModel((a, c))

    def test_encoding_must_match_members(self):
        model = zero_alpha_model(0.0)
        mismatched = EncodingParams(base=4, bits_per_alpha=3)  # c_bound 21, member has 3
        with pytest.raises(ValueError, match="c_bound"):
            EnsembleModel((model,), encoding=mismatched)

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="at least one member"):
            EnsembleModel(())


class TestTrainBinary:
    @pytest.mark.parametrize("seed", range(5))
    def test_exhaustive_training_minimizes_dual_energy(self, seed):
        rng = np.random.default_rng(seed)
        data = random_binary_dataset(rng, 4, 2)
        enc = EncodingParams(base=2, bits_per_alpha=2, penalty=1.0,
                             kernel=KernelParams(gamma=0.8))
        config = TrainConfig(encoding=enc, sampler="exhaustive", ensemble_size=1)
        model = train_binary(data, config)

        problem = build_qubo(data, enc)
        best = solve_exhaustive(problem)
        expected = decode_alphas(best.best.bits, enc.base, enc.bits_per_alpha)
        assert_allclose(model.members[0].alphas, expected, atol=0)

    def test_member_biases_fit_by_formula(self):
        rng = np.random.default_rng(11)
        data = random_binary_dataset(rng, 5, 2)
        enc = EncodingParams(base=2, bits_per_alpha=2, kernel=KernelParams(gamma=0.5))
        config = TrainConfig(encoding=enc, sampler="exhaustive", ensemble_size=3)
        model = train_binary(data, config)
        for member in model.members:
            bias, degenerate = compute_bias(member.alphas, data, enc.kernel, 3.0)
            assert member.bias == bias
            assert member.degenerate == degenerate

    def test_ensemble_members_in_energy_order(self):
        rng = np.random.default_rng(12)
        data = random_binary_dataset(rng, 4, 2)
        enc = EncodingParams(base=2, bits_per_alpha=2)
        config = TrainConfig(encoding=enc, sampler="exhaustive", ensemble_size=4)
        model = train_binary(data, config)
        problem = build_qubo(data, enc)
        samples = solve_exhaustive(problem, top_k=4)
        for member, sample in zip(model.members, samples):
            expected = decode_alphas(sample.bits, enc.base, enc.bits_per_alpha)
            assert np.array_equal(member.alphas, expected)

    def test_anneal_deterministic(self):
        rng = np.random.default_rng(13)
        data = random_binary_dataset(rng, 6, 2)
        config = TrainConfig(
            encoding=EncodingParams(),
            sampler="anneal",
            schedule=AnnealSchedule(sweeps=50, num_reads=8, seed=21),
            ensemble_size=2,
        )
        a = train_binary(data, config)
        b = train_binary(data, config)
        assert len(a.members) == len(b.members)
        for ma, mb in zip(a.members, b.members):
            assert np.array_equal(ma.alphas, mb.alphas)
            assert ma.bias == mb.bias

    def test_separable_blobs_perfectly_classified(self):
        rng = np.random.default_rng(14)
        pos = rng.normal(loc=(3.0, 0.0), scale=0.3, size=(8, 2))
        neg = rng.normal(loc=(-3.0, 0.0), scale=0.3, size=(8, 2))
        data = Dataset(np.vstack([pos, neg]), [1] * 8 + [-1] * 8)
        config = TrainConfig(
            encoding=EncodingParams(kernel=KernelParams(gamma=1.0)),
            sampler="anneal",
            schedule=AnnealSchedule(sweeps=200, num_reads=16, seed=0),
        )
        model = train_binary(data, config)
        predictions = predict_labels(ensemble_decision_values(model, data.features))
        assert np.array_equal(predictions, data.labels)

    def test_rejects_single_class(self):
        data = Dataset([[0.0], [1.0]], [1, 1])
        with pytest.raises(ValueError, match="single-class"):
            train_binary(data, TrainConfig())

    def test_rejects_unknown_sampler(self):
        with pytest.raises(ValueError, match="unknown sampler"):
            TrainConfig(sampler="quantum")


class TestAdjustBias:
    def test_recovers_shifted_bias(self):
        rng = np.random.default_rng(20)
        data = random_binary_dataset(rng, 12, 2)
        config = TrainConfig(sampler="exhaustive", encoding=EncodingParams(
            base=2, bits_per_alpha=1, kernel=KernelParams(gamma=0.5)))
        model = train_binary(data, config)
        base_acc = (predict_labels(ensemble_decision_values(model, data.features))
                    == data.labels).mean()
        # sabotage the bias, then let the scan repair it
        broken = EnsembleModel(
            tuple(
                BinaryModel(m.alphas, m.bias + 0.8, data, m.kernel, m.c_bound)
                for m in model.members
            ),
            encoding=model.encoding,
        )
        repaired = adjust_bias(broken, data, radius=1.0, step=0.01)
        new_acc = (predict_labels(ensemble_decision_values(repaired, data.features))
                   == data.labels).mean()
        assert new_acc >= base_acc

    @pytest.mark.parametrize("seed", range(6))
    def test_never_decreases_training_accuracy(self, seed):
        rng = np.random.default_rng(seed)
        data = random_binary_dataset(rng, 10, 2)
        kernel = KernelParams(gamma=1.0)
        members = tuple(
            BinaryModel(rng.uniform(0, 3, size=10), rng.normal(scale=0.5), data, kernel, 3.0)
            for _ in range(2)
        )
        model = EnsembleModel(members)
        before = (predict_labels(ensemble_decision_values(model, data.features))
                  == data.labels).mean()
        adjusted = adjust_bias(model, data)
        after = (predict_labels(ensemble_decision_values(adjusted, data.features))
                 == data.labels).mean()
        assert after >= before

    def test_zero_offset_when_nothing_improves(self):
        # a perfect separable model cannot be improved: ties prefer offset 0
        data = Dataset([[-2.0], [2.0]], [-1, 1])
        model = EnsembleModel(
            (BinaryModel(np.array([1.0, 1.0]), 0.0, data,
                         KernelParams(kind="linear"), 3.0),)
        )
        adjusted = adjust_bias(model, data, radius=0.5, step=0.1)
        assert adjusted.members[0].bias == 0.0

    def test_offset_applied_to_every_member(self):
        data = Dataset([[0.0], [1.0]], [1, -1])
        kernel = KernelParams()
        members = tuple(
            BinaryModel(np.zeros(2), b, data, kernel, 3.0) for b in (-1.0, -2.0)
        )
        adjusted = adjust_bias(EnsembleModel(members), data, radius=3.0, step=0.5)
        deltas = [a.bias - m.bias for a, m in zip(adjusted.members, members)]
        assert deltas[0] == deltas[1]

    def test_validation(self):
        model = EnsembleModel((zero_alpha_model(0.0),))
        data = model.data
        with pytest.raises(ValueError, match="radius"):
            adjust_bias(model, data, radius=0.0)
        with pytest.raises(ValueError, match="step"):
            adjust_bias(model, data, step=0.0)
        with pytest.raises(ValueError, match="step"):
            adjust_bias(model, data, radius=1.0, step=3.0)


class TestTrainClassical:
    def test_two_point_exact_solution(self):
        # symmetric linear-kernel pair: the first pairwise update lands on
        # alphas (0.5, 0.5) and bias 0 exactly, with zero gradient after
        data = Dataset([[1.0, 0.0], [-1.0, 0.0]], [1, -1])
        model = train_classical(data, KernelParams(kind="linear"), c_bound=3.0)
        assert model.converged
        assert np.array_equal(model.alphas, [0.5, 0.5])
        assert model.bias == 0.0
        assert decision_function(model, np.array([1.0, 0.0])) == 1.0

    @pytest.mark.parametrize("seed", range(6))
    def test_kkt_conditions_on_separable_data(self, seed):
        rng = np.random.default_rng(seed)
        pos = rng.normal(loc=(2.5, 0.0), scale=0.4, size=(10, 2))
        neg = rng.normal(loc=(-2.5, 0.0), scale=0.4, size=(10, 2))
        data = Dataset(np.vstack([pos, neg]), [1] * 10 + [-1] * 10)
        model = train_classical(data, KernelParams(gamma=0.5), c_bound=3.0)
        assert model.converged
        assert kkt_violation(model) <= 1e-6
        balance = float(model.alphas @ data.labels.astype(float))
        assert abs(balance) <= 1e-9
        assert np.all(model.alphas >= 0)
        assert np.all(model.alphas <= 3.0)

    def test_training_accuracy_on_separable_data(self):
        rng = np.random.default_rng(30)
        pos = rng.normal(loc=(3.0, 0.0), scale=0.3, size=(12, 2))
        neg = rng.normal(loc=(-3.0, 0.0), scale=0.3, size=(12, 2))
        data = Dataset(np.vstack([pos, neg]), [1] * 12 + [-1] * 12)
        model = train_classical(data, KernelParams(gamma=1.0), c_bound=3.0)
        predictions = predict_labels(decision_values(model, data.features))
        assert np.array_equal(predictions, data.labels)

    def test_iteration_cap_warns_and_flags(self):
        rng = np.random.default_rng(31)
        data = random_binary_dataset(rng, 20, 2)
        with pytest.warns(RuntimeWarning, match="iteration cap"):
            model = train_classical(data, KernelParams(gamma=0.1), 3.0, max_iter=1)
        assert not model.converged

    def test_validation(self):
        data = Dataset([[0.0], [1.0]], [1, -1])
        with pytest.raises(ValueError, match="c_bound"):
            train_classical(data, KernelParams(), c_bound=0.0)
        single = Dataset([[0.0], [1.0]], [1, 1])
        with pytest.raises(ValueError, match="single-class"):
            train_classical(single, KernelParams(), c_bound=3.0)


class TestModelPersistence:
    def test_round_trip_decisions_exact(self, tmp_path):
        rng = np.random.default_rng(40)
        data = random_binary_dataset(rng, 6, 3)
        config = TrainConfig(
            encoding=EncodingParams(base=2, bits_per_alpha=2, penalty=1.0,
                                    kernel=KernelParams(gamma=0.37)),
            sampler="exhaustive",
            ensemble_size=3,
        )
        model = train_binary(data, config)
        path = tmp_path / "model.model"
        save_model(model, path)
        back = load_model(path)
        assert len(back.members) == len(model.members)
        assert back.encoding == model.encoding
        X = rng.normal(size=(25, 3))
        assert np.array_equal(
            ensemble_decision_values(back, X), ensemble_decision_values(model, X)
        )

    def test_binary_model_wrapped_as_single_member(self, tmp_path):
        data = Dataset([[1.0, 0.0], [-1.0, 0.0]], [1, -1])
        model = train_classical(data, KernelParams(kind="linear"), c_bound=3.0)
        path = tmp_path / "classical.model"
        save_model(model, path)
        back = load_model(path)
        assert len(back.members) == 1
        assert back.encoding is None
        assert back.members[0].bias == model.bias
        assert np.array_equal(back.members[0].alphas, model.alphas)
        assert back.members[0].converged == model.converged

    def test_text_preserves_flags(self):
        data = Dataset([[0.0], [1.0]], [1, -1])
        member = BinaryModel(np.zeros(2), 0.0, data, KernelParams(), 3.0,
                             degenerate=True, converged=False)
        back = model_from_text(model_to_text(EnsembleModel((member,))))
        assert back.members[0].degenerate
        assert not back.members[0].converged

    def test_load_errors(self, tmp_path):
        path = tmp_path / "bad.model"
        path.write_text("something else\n")
        with pytest.raises(ValueError, match="not a model file"):
            load_model(path)
        with pytest.raises(ValueError, match="unexpected end of file"):
            model_from_text("format qubosvm-model 1\nkind gaussian\n")
        truncated = "format qubosvm-model 1\ngamma 1.0\n"
        with pytest.raises(ValueError, match="expected 'kind'"):
            model_from_text(truncated)
