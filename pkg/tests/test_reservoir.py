from itertools import product

import numpy as np
import pytest

from memrc.reservoir import (
    UNDEFINED_LABEL,
    AcquisitionConfig,
    CircuitReservoir,
    StreamConfig,
    boolean_eval,
    build_static_dataset,
    build_stream_dataset,
    run_static_trial,
    run_stream_trial,
    sliding_targets,
)
from memrc.waveform import amplitude_table

from conftest import U_CHAOTIC, U_PERIODIC

PAPER_TABLE = amplitude_table(2, explicit=[0.161, 0.188, 0.299, 0.346])


def small_acq(**overrides):
    base = dict(
        samples_per_trace=200,
        periods_per_trace=5,
        repetitions=2,
        init_noise_sigma=1e-3,
        meas_noise_sigma=2e-3,
        rng_seed=0,
    )
    base.update(overrides)
    return AcquisitionConfig(**base)


class TestBooleanEval:
    def test_basic_gates(self):
        assert boolean_eval("XOR", [1, 0]) == 1
        assert boolean_eval("XOR", [1, 1]) == 0
        assert boolean_eval("AND", [1, 1]) == 1
        assert boolean_eval("OR", [0, 0]) == 0
        assert boolean_eval("NAND", [1, 1]) == 0
        assert boolean_eval("NOR", [0, 0]) == 1
        assert boolean_eval("XNOR", [1, 0]) == 0

    def test_four_input_parity(self):
        assert boolean_eval("XOR", [1, 1, 1, 1]) == 0
        assert boolean_eval("XOR", [1, 1, 1, 0]) == 1

    def test_asymmetric_two_input(self):
        assert boolean_eval("NOT_A_AND_B", [0, 1]) == 1
        assert boolean_eval("NOT_A_AND_B", [1, 1]) == 0
        assert boolean_eval("A_AND_NOT_B", [1, 0]) == 1
        assert boolean_eval("A_AND_NOT_B", [1, 1]) == 0

    def test_majority(self):
        assert boolean_eval("MAJ", [1, 1, 0]) == 1
        assert boolean_eval("MAJ", [1, 0, 0]) == 0
        assert boolean_eval("MAJ", [1, 1, 0, 0, 1]) == 1

    def test_mux(self):
        assert boolean_eval("MUX", [0, 1, 0]) == 1  # selector 0 picks a
        assert boolean_eval("MUX", [1, 1, 0]) == 0  # selector 1 picks b

    def test_three_input_composites(self):
        for a, b, c in product((0, 1), repeat=3):
            assert boolean_eval("XORAND", [a, b, c]) == (a ^ b) & c
            assert boolean_eval("ANDXOR", [a, b, c]) == (a & b) ^ c

    def test_case_insensitive(self):
        assert boolean_eval("xor", [1, 0]) == 1

    def test_errors(self):
        with pytest.raises(ValueError):
            boolean_eval("NOPE", [0, 1])
        with pytest.raises(ValueError):
            boolean_eval("XOR", [1])
        with pytest.raises(ValueError):
            boolean_eval("MAJ", [1, 0])  # even arity
        with pytest.raises(ValueError):
            boolean_eval("MUX", [1, 0])
        with pytest.raises(ValueError):
            boolean_eval("AND", [1, 2])


class TestSlidingTargets:
    def test_xor2_example(self):
        out = sliding_targets([1, 0, 1, 1], "XOR", 2)
        np.testing.assert_array_equal(out, [UNDEFINED_LABEL, 1, 1, 0])

    def test_xor3_example(self):
        out = sliding_targets([1, 0, 1, 0, 0, 1], "XOR", 3)
        np.testing.assert_array_equal(
            out, [UNDEFINED_LABEL, UNDEFINED_LABEL, 0, 1, 1, 1]
        )

    def test_and_marks_all_ones_windows(self):
        bits = [1, 1, 1, 0, 1, 1]
        out = sliding_targets(bits, "AND", 2)
        expected = [UNDEFINED_LABEL] + [
            int(bits[i - 1] == bits[i] == 1) for i in range(1, len(bits))
        ]
        np.testing.assert_array_equal(out, expected)

    def test_too_short(self):
        with pytest.raises(ValueError):
            sliding_targets([1, 0], "XOR", 3)


class TestRunStaticTrial:
    def test_deterministic_without_noise(self, params, model465):
        acq = small_acq(init_noise_sigma=0.0, meas_noise_sigma=0.0)
        a = run_static_trial([0, 1], PAPER_TABLE, params, model465, acq)
        b = run_static_trial([0, 1], PAPER_TABLE, params, model465, acq)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (acq.samples_per_trace,)

    def test_periodic_regime_is_stable(self, params, model465):
        # Initial-condition noise leaves low-amplitude traces unchanged.
        table = amplitude_table(1, u_min=U_PERIODIC, u_max=0.4)
        acq = small_acq(periods_per_trace=10, init_noise_sigma=1e-3,
                        meas_noise_sigma=0.0)
        rng = np.random.default_rng(0)
        a = run_static_trial([0], table, params, model465, acq, rng)
        b = run_static_trial([0], table, params, model465, acq, rng)
        assert np.max(np.abs(a - b)) < 3 * 2e-3

    def test_chaotic_regime_amplifies_tiny_noise(self, params, model465):
        # Traces agree early and diverge late (trial-to-trial variability).
        table = amplitude_table(1, u_min=0.1, u_max=U_CHAOTIC)
        acq = small_acq(periods_per_trace=40, samples_per_trace=2000,
                        init_noise_sigma=1e-6, meas_noise_sigma=0.0)
        rng = np.random.default_rng(0)
        a = run_static_trial([1], table, params, model465, acq, rng)
        b = run_static_trial([1], table, params, model465, acq, rng)
        n = len(a)
        assert np.max(np.abs(a[: n // 10] - b[: n // 10])) < 1e-2
        assert np.max(np.abs(a[n // 2 :] - b[n // 2 :])) > 0.1


class TestBuildStaticDataset:
    def test_xor_shape_and_balance(self, params, model465):
        acq = small_acq(repetitions=3)
        ds = build_static_dataset("XOR", 2, PAPER_TABLE, params, model465, acq)
        assert ds.features.shape == (12, acq.samples_per_trace)
        assert ds.labels.sum() == 6  # two of four words are labeled 1
        assert ds.r_mem == 465e3

    def test_and_single_repetition(self, params, model465):
        acq = small_acq(repetitions=1)
        ds = build_static_dataset("AND", 2, PAPER_TABLE, params, model465, acq)
        np.testing.assert_array_equal(ds.labels, [0, 0, 0, 1])
        np.testing.assert_array_equal(
            ds.words, [[0, 0], [0, 1], [1, 0], [1, 1]]
        )

    def test_maj_counts(self, params, model465):
        table = amplitude_table(3, u_min=0.16, u_max=0.35)
        acq = small_acq(repetitions=2)
        ds = build_static_dataset("MAJ", 3, table, params, model465, acq)
        assert len(ds.features) == 16
        assert ds.labels.sum() == 8

    def test_seeded_reproducibility(self, params, model465):
        acq = small_acq(rng_seed=7)
        a = build_static_dataset("XOR", 2, PAPER_TABLE, params, model465, acq)
        b = build_static_dataset("XOR", 2, PAPER_TABLE, params, model465, acq)
        np.testing.assert_array_equal(a.features, b.features)

    def test_seed_changes_data(self, params, model465):
        a = build_static_dataset("XOR", 2, PAPER_TABLE, params, model465,
                                 small_acq(rng_seed=1))
        b = build_static_dataset("XOR", 2, PAPER_TABLE, params, model465,
                                 small_acq(rng_seed=2))
        assert not np.array_equal(a.features, b.features)

    def test_table_mismatch(self, params, model465):
        with pytest.raises(ValueError):
            build_static_dataset("XOR", 3, PAPER_TABLE, params, model465, small_acq())

    def test_csv_export(self, params, model465, tmp_path):
        acq = small_acq(repetitions=1, samples_per_trace=10)
        ds = build_static_dataset("XOR", 2, PAPER_TABLE, params, model465, acq)
        path = tmp_path / "ds.csv"
        ds.to_csv(path, sidecar={"seed": 0})
        rows = path.read_text().strip().splitlines()
        assert rows[0].endswith(",label")
        assert len(rows) == 5
        assert (tmp_path / "ds.csv.json").exists()


STREAM_CFG = StreamConfig(u_low=0.1, u_high=0.25, offset=0.01)


class TestStreamTrials:
    def test_all_zero_stream_settles_to_identical_blocks(self, params, model465):
        # The period-1 orbit is approached geometrically: the block-to-block
        # difference shrinks every period and ends below noise scale.
        acq = small_acq(init_noise_sigma=0.0, meas_noise_sigma=0.0,
                        transient_discard_periods=2, samples_per_period=50)
        ds = run_stream_trial([0] * 30, params, model465, acq, STREAM_CFG)
        diffs = [
            float(np.max(np.abs(ds.features[j] - ds.features[j - 1])))
            for j in range(3, 30)
        ]
        assert all(a > b for a, b in zip(diffs, diffs[1:]))
        assert diffs[-1] < 1e-4
        np.testing.assert_allclose(ds.features[-1], ds.features[-2], atol=1e-4)

    def test_fading_memory_101_vs_001(self, params, model465):
        # The third-period response still remembers the first bit.
        acq = small_acq(init_noise_sigma=0.0, meas_noise_sigma=0.0,
                        samples_per_period=50)
        a = run_stream_trial([1, 0, 1, 1, 0], params, model465, acq, STREAM_CFG)
        b = run_stream_trial([0, 0, 1, 1, 0], params, model465, acq, STREAM_CFG)
        assert np.max(np.abs(a.features[2] - b.features[2])) > 3 * 2e-3

    def test_labels_attached(self, params, model465):
        acq = small_acq(init_noise_sigma=0.0, meas_noise_sigma=0.0)
        ds = run_stream_trial([1, 0, 1], params, model465, acq, STREAM_CFG,
                              fn="XOR", n_inputs=2)
        np.testing.assert_array_equal(ds.labels, [UNDEFINED_LABEL, 1, 1])

    def test_deterministic(self, params, model465):
        acq = small_acq(rng_seed=5)
        a = run_stream_trial([1, 0, 1, 1], params, model465, acq, STREAM_CFG)
        b = run_stream_trial([1, 0, 1, 1], params, model465, acq, STREAM_CFG)
        np.testing.assert_array_equal(a.features, b.features)


class TestBuildStreamDataset:
    def test_shapes_and_discard(self, params, model465):
        acq = small_acq(transient_discard_periods=2, samples_per_period=50)
        X, y, sid, streams = build_stream_dataset(
            3, 10, "XOR", 2, params, model465, acq, STREAM_CFG
        )
        # 10 periods per stream minus max(discard=2, n-1=1) leading ones.
        assert X.shape == (3 * 8, 50)
        assert len(y) == len(sid) == 24
        assert streams.shape == (3, 10)
        assert set(np.unique(sid)) == {0, 1, 2}
        assert UNDEFINED_LABEL not in y

    def test_labels_match_streams(self, params, model465):
        acq = small_acq()
        X, y, sid, streams = build_stream_dataset(
            2, 8, "AND", 2, params, model465, acq, STREAM_CFG
        )
        for s_idx in range(2):
            expected = sliding_targets(list(streams[s_idx]), "AND", 2)[2:]
            np.testing.assert_array_equal(y[sid == s_idx], expected)

    def test_fading_memory_correlation_decays(self, params, model465):
        # Correlation between the per-period mean feature and the bit fed
        # n periods earlier decays with n but is nonzero for n = 1, 2.
        acq = small_acq(samples_per_period=50, transient_discard_periods=3,
                        init_noise_sigma=0.0, meas_noise_sigma=0.0, rng_seed=3)
        X, y, sid, streams = build_stream_dataset(
            8, 24, "XOR", 4, params, model465, acq, STREAM_CFG
        )
        feat = X.mean(axis=1)
        corr = {}
        for lag in (0, 1, 2, 6):
            bits = []
            k = 0
            for s_idx in range(8):
                n_rows = int(np.sum(sid == s_idx))
                offset = 24 - n_rows
                for j in range(n_rows):
                    bits.append(streams[s_idx][offset + j - lag])
                k += n_rows
            corr[lag] = abs(np.corrcoef(feat, bits)[0, 1])
        assert corr[1] > 0.05 and corr[2] > 0.05
        assert corr[6] < corr[1]

    def test_stream_too_short(self, params, model465):
        with pytest.raises(ValueError):
            build_stream_dataset(2, 2, "XOR", 3, params, model465, small_acq(),
                                 STREAM_CFG)


class TestCircuitReservoir:
    def test_transform_matches_run_static_trial(self, params, model465):
        acq = small_acq(init_noise_sigma=0.0, meas_noise_sigma=0.0)
        res = CircuitReservoir(table=PAPER_TABLE, params=params, model=model465,
                               acq=acq)
        X = np.array([[0, 1], [1, 1]])
        out = res.fit(X).transform(X)
        expected = run_static_trial([0, 1], PAPER_TABLE, params, model465, acq)
        np.testing.assert_array_equal(out[0], expected)
        assert out.shape == (2, acq.samples_per_trace)

    def test_get_params_roundtrip(self, params, model465):
        res = CircuitReservoir(table=PAPER_TABLE, params=params, model=model465,
                               acq=small_acq())
        cloned = CircuitReservoir(**res.get_params())
        assert cloned.table is PAPER_TABLE

    def test_unconfigured_rejected(self):
        with pytest.raises(ValueError):
            CircuitReservoir().fit(np.zeros((2, 2)))

    def test_wrong_width_rejected(self, params, model465):
        res = CircuitReservoir(table=PAPER_TABLE, params=params, model=model465,
                               acq=small_acq())
        with pytest.raises(ValueError):
            res.transform(np.zeros((2, 3)))
