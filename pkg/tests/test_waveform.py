import numpy as np
import pytest
from hypothesis import given, strategies as st

from memrc.waveform import (
    DEFAULT_PERIOD,
    INIT_PULSE_AMPLITUDE,
    INIT_PULSE_DURATION,
    SETTLE_DURATION,
    AmplitudeTable,
    Segment,
    Waveform,
    amplitude_table,
    build_drive,
    data_start_time,
    encode_stream,
    encode_word,
    square_drive,
    word_index,
)

PAPER_TABLE = [0.161, 0.188, 0.299, 0.346]


class TestAmplitudeTable:
    def test_explicit_paper_table(self):
        t = amplitude_table(2, explicit=PAPER_TABLE)
        assert t.amplitudes == tuple(PAPER_TABLE)

    def test_one_bit_linear(self):
        t = amplitude_table(1, u_min=0.1, u_max=0.3)
        assert t.amplitudes == (0.1, 0.3)

    def test_three_bit_linear_formula(self):
        t = amplitude_table(3, u_min=0.161, u_max=0.346)
        assert t.amplitudes[4] == pytest.approx(0.161 + 4 / 7 * 0.185, rel=1e-12)
        assert t.amplitudes[4] == pytest.approx(0.2667, abs=5e-4)

    def test_default_is_affine_in_index(self):
        t = amplitude_table(2, u_min=0.1, u_max=0.4)
        a = t.amplitudes
        assert a[1] - a[0] == pytest.approx(a[2] - a[1], rel=1e-12)
        assert a[2] - a[1] == pytest.approx(a[3] - a[2], rel=1e-12)

    def test_wrong_explicit_length(self):
        with pytest.raises(ValueError):
            amplitude_table(2, explicit=[0.1, 0.2])

    def test_non_increasing_rejected(self):
        with pytest.raises(ValueError):
            amplitude_table(2, explicit=[0.1, 0.3, 0.2, 0.4])

    def test_n_bits_bounds(self):
        for n in (0, 9):
            with pytest.raises(ValueError):
                amplitude_table(n, u_min=0.1, u_max=0.2)

    def test_missing_range(self):
        with pytest.raises(ValueError):
            amplitude_table(2)


class TestEncodeWord:
    def test_paper_words(self):
        t = amplitude_table(2, explicit=PAPER_TABLE)
        assert encode_word([0, 0], t) == 0.161
        assert encode_word([0, 1], t) == 0.188
        assert encode_word([1, 0], t) == 0.299
        assert encode_word([1, 1], t) == 0.346

    def test_single_bit(self):
        t = amplitude_table(1, u_min=0.1, u_max=0.3)
        assert encode_word([0], t) == 0.1

    def test_length_mismatch(self):
        t = amplitude_table(2, explicit=PAPER_TABLE)
        with pytest.raises(ValueError):
            encode_word([0, 1, 1], t)

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=8))
    def test_word_index_big_endian(self, bits):
        assert word_index(bits) == int("".join(map(str, bits)), 2)

    def test_word_index_rejects_non_bits(self):
        with pytest.raises(ValueError):
            word_index([0, 2])


class TestEncodeStream:
    def test_three_bit_stream(self):
        w = encode_stream([1, 0, 1], 0.1, 0.25, 0.01, DEFAULT_PERIOD)
        assert len(w.segments) == 3
        assert [s.amplitude for s in w.segments] == [0.25, 0.1, 0.25]
        assert w.duration == pytest.approx(3.402e-3, rel=1e-12)

    def test_single_bit_is_plain_square(self):
        w = encode_stream([0], 0.2, 0.2, 0.0, DEFAULT_PERIOD)
        sq = square_drive(0.2, 1, period=DEFAULT_PERIOD)
        t = np.linspace(0, DEFAULT_PERIOD, 101)
        np.testing.assert_allclose(w.sample(t), sq.sample(t))

    def test_all_ones_equals_constant_square(self):
        w = encode_stream([1] * 5, 0.1, 0.3, 0.01, DEFAULT_PERIOD)
        sq = square_drive(0.3, 5, period=DEFAULT_PERIOD, offset=0.01)
        t = np.linspace(0, 5 * DEFAULT_PERIOD, 501)
        np.testing.assert_allclose(w.sample(t), sq.sample(t))

    def test_per_period_mean_and_swing(self):
        bits = [1, 0, 0, 1]
        offset = 0.01
        w = encode_stream(bits, 0.1, 0.25, offset, DEFAULT_PERIOD)
        dt = DEFAULT_PERIOD / 100
        for j, b in enumerate(bits):
            t = j * DEFAULT_PERIOD + (np.arange(100) + 0.5) * dt
            u = w.sample(t)
            assert np.mean(u) == pytest.approx(offset, abs=1e-12)
            expected = 0.25 if b else 0.1
            assert np.max(u) - np.min(u) == pytest.approx(expected, rel=1e-12)

    def test_empty_stream_rejected(self):
        with pytest.raises(ValueError):
            encode_stream([], 0.1, 0.25, 0.01)

    def test_non_bit_rejected(self):
        with pytest.raises(ValueError):
            encode_stream([0, 2], 0.1, 0.25, 0.01)


class TestBuildDrive:
    def test_word_drive_duration(self):
        data = square_drive(0.161, 20, period=DEFAULT_PERIOD)
        drive = build_drive(+1, data)
        assert drive.duration == pytest.approx(25.18e-3, rel=1e-12)

    def test_stream_drive_duration(self):
        data = encode_stream([0, 1] * 15, 0.1, 0.25, 0.01, DEFAULT_PERIOD)
        drive = build_drive(+1, data)
        assert drive.duration == pytest.approx(36.52e-3, rel=1e-12)

    def test_pulse_and_gap_only(self):
        drive = build_drive(-1, None)
        assert len(drive.segments) == 2
        assert drive.duration == pytest.approx(
            INIT_PULSE_DURATION + SETTLE_DURATION, rel=1e-12
        )
        assert drive.sample(0.1e-3) == -INIT_PULSE_AMPLITUDE
        assert drive.sample(1.0e-3) == 0.0

    def test_data_start_time(self):
        assert data_start_time() == INIT_PULSE_DURATION + SETTLE_DURATION

    def test_bad_polarity(self):
        with pytest.raises(ValueError):
            build_drive(0, None)


class TestSampling:
    def test_square_convention(self):
        # First half of each period high: offset + amplitude/2.
        w = square_drive(0.2, 2, period=1e-3, offset=0.05)
        assert w.sample(0.1e-3) == pytest.approx(0.15)
        assert w.sample(0.6e-3) == pytest.approx(-0.05)
        assert w.sample(1.2e-3) == pytest.approx(0.15)

    def test_sides_at_discontinuity(self):
        w = square_drive(0.2, 1, period=1e-3)
        assert w.sample(0.5e-3, side="right") == pytest.approx(-0.1)
        assert w.sample(0.5e-3, side="left") == pytest.approx(0.1)

    def test_endpoint_uses_left_limit(self):
        w = square_drive(0.2, 1, period=1e-3)
        assert w.sample(1e-3) == pytest.approx(-0.1)
        assert w.sample(1e-3, side="left") == pytest.approx(-0.1)

    def test_out_of_range_rejected(self):
        w = square_drive(0.2, 1, period=1e-3)
        for t in (-1e-4, 1.1e-3):
            with pytest.raises(ValueError):
                w.sample(t)

    @given(st.floats(min_value=0.0, max_value=3.5e-3, allow_nan=False))
    def test_in_range_never_fails(self, t):
        w = build_drive(+1, square_drive(0.2, 1, period=1e-3))
        u = w.sample(t)
        assert np.isfinite(u)

    def test_empty_waveform_rejected(self):
        with pytest.raises(ValueError):
            Waveform(()).sample(0.0)

    def test_jump_times(self):
        w = build_drive(+1, square_drive(0.2, 2, period=1e-3))
        expected = np.array([0.5e-3, 2.5e-3, 3.0e-3, 3.5e-3, 4.0e-3])
        np.testing.assert_allclose(np.sort(w.jump_times()), expected)

    def test_to_csv_roundtrip(self, tmp_path):
        w = square_drive(0.2, 1, period=1e-3)
        path = tmp_path / "wave.csv"
        w.to_csv(path, dt=0.25e-3)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "t,u"
        assert len(rows) == 6  # header + 5 grid points


class TestSegment:
    def test_square_needs_period(self):
        with pytest.raises(ValueError):
            Segment(kind="square", amplitude=0.1, duration=1e-3)

    def test_square_duration_must_be_multiple(self):
        with pytest.raises(ValueError):
            Segment(kind="square", amplitude=0.1, duration=1.5e-3, period=1e-3)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Segment(kind="sine", amplitude=0.1, duration=1e-3)
