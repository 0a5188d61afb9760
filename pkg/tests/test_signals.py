import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from friridge.exceptions import InvalidParameterError
from friridge.signals import (
    Signal,
    add_noise,
    load_signal,
    make_component,
    make_linear_chirp,
    make_sin_fm,
    make_sinusoid,
    noise_variance,
    read_csv,
    read_truth_csv,
    read_wav,
    realized_snr,
    synthesize,
    write_csv,
    write_truth_csv,
    write_wav,
)

freqs = st.floats(min_value=0.01, max_value=0.49)


def _fd_error(c):
    return np.max(np.abs(c.inst_freq[:-1] - np.diff(c.phase)))


class TestSinusoid:
    def test_constant_if(self):
        c = make_sinusoid(500, 0.1, 1.0)
        assert np.all(c.if_fn(np.arange(500)) == 0.1)

    def test_phase_value(self):
        assert make_sinusoid(500, 0.1).phase_fn(250) == pytest.approx(25.0, abs=1e-12)

    def test_quarter_rate_samples(self):
        x = synthesize([make_sinusoid(4, 0.25)]).samples
        np.testing.assert_allclose(x, [1, 1j, -1, -1j], atol=1e-15)

    @pytest.mark.parametrize("f0", [0.0, 0.5, -0.1, 0.7])
    def test_out_of_band(self, f0):
        with pytest.raises(InvalidParameterError):
            make_sinusoid(100, f0)

    def test_negative_amplitude(self):
        with pytest.raises(InvalidParameterError):
            make_sinusoid(10, 0.1, amp=-1.0)


class TestChirp:
    def test_endpoints(self):
        c = make_linear_chirp(500, 0.1, 0.3)
        assert c.if_fn(0) == pytest.approx(0.1)
        assert c.if_fn(499) == pytest.approx(0.3)
        assert c.phase_fn(0) == 0.0

    def test_degenerate_equals_sinusoid(self):
        a = make_linear_chirp(500, 0.2, 0.2)
        b = make_sinusoid(500, 0.2)
        np.testing.assert_allclose(a.samples(), b.samples(), atol=1e-12)
        np.testing.assert_array_equal(a.inst_freq, b.inst_freq)

    def test_finite_difference(self):
        # phase is quadratic, so its forward difference equals the IF at the midpoint
        c = make_linear_chirp(500, 0.1, 0.3)
        rate = 0.2 / 499
        np.testing.assert_allclose(np.diff(c.phase), c.inst_freq[:-1] + rate / 2, atol=1e-12)
        assert _fd_error(c) <= 1e-3
        central = (c.phase[2:] - c.phase[:-2]) / 2
        assert np.max(np.abs(central - c.inst_freq[1:-1])) < 1e-6

    def test_out_of_band(self):
        with pytest.raises(InvalidParameterError):
            make_linear_chirp(100, 0.1, 0.6)


class TestSinFm:
    def test_if_range(self):
        c = make_sin_fm(500, 0.25, 0.05, 0.004)
        assert c.inst_freq.min() >= 0.2 - 1e-12
        assert c.inst_freq.max() <= 0.3 + 1e-12
        assert c.inst_freq.max() - c.inst_freq.min() > 0.09

    def test_zero_deviation_is_sinusoid(self):
        a = make_sin_fm(500, 0.25, 0.0, 0.004)
        b = make_sinusoid(500, 0.25)
        np.testing.assert_allclose(a.samples(), b.samples(), atol=1e-12)

    def test_finite_difference(self):
        c = make_sin_fm(500, 0.25, 0.05, 0.004)
        central = (c.phase[2:] - c.phase[:-2]) / 2
        assert np.max(np.abs(central - c.inst_freq[1:-1])) < 1e-5
        assert c.phase_fn(0) == 0.0

    @pytest.mark.parametrize("fc,fd", [(0.03, 0.05), (0.47, 0.05)])
    def test_range_leaves_band(self, fc, fd):
        with pytest.raises(InvalidParameterError):
            make_sin_fm(500, fc, fd, 0.004)


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(["sinusoid", "chirp", "sin_fm"]),
    f1=freqs,
    f2=freqs,
    fmod=st.floats(min_value=1e-4, max_value=0.01),
)
def test_discrete_derivative_consistency(kind, f1, f2, fmod):
    if kind == "sinusoid":
        c = make_sinusoid(300, f1)
    elif kind == "chirp":
        c = make_linear_chirp(300, f1, f2)
    else:
        fc, fd = 0.25, min(abs(f1 - 0.25), 0.2)
        c = make_sin_fm(300, fc, fd, fmod)
    slope = np.max(np.abs(np.diff(c.inst_freq)))
    curvature = np.max(np.abs(np.diff(c.inst_freq, 2)), initial=0.0)
    # a forward difference lags the IF by half a sample, plus a curvature term
    assert _fd_error(c) <= 0.5 * slope + curvature + 1e-12
    if slope <= 2e-3:
        assert _fd_error(c) <= 1e-3
    assert np.all(c.amplitude >= 0)


class TestSynthesize:
    def test_empty_is_zero(self):
        s = synthesize([], n_samples=16)
        assert np.all(s.samples == 0) and len(s) == 16

    def test_empty_needs_length(self):
        with pytest.raises(InvalidParameterError):
            synthesize([])

    def test_doubling(self):
        c = make_linear_chirp(200, 0.1, 0.2)
        np.testing.assert_array_equal(synthesize([c, c]).samples, 2 * synthesize([c]).samples)

    def test_mismatched_lengths(self):
        with pytest.raises(InvalidParameterError):
            synthesize([make_sinusoid(10, 0.1), make_sinusoid(11, 0.1)])

    @settings(max_examples=25, deadline=None)
    @given(a=freqs, b=freqs, c=freqs)
    def test_linearity(self, a, b, c):
        A = [make_sinusoid(64, a), make_linear_chirp(64, b, c)]
        B = [make_sinusoid(64, c)]
        np.testing.assert_array_equal(
            synthesize(A + B).samples, synthesize(A).samples + synthesize(B).samples
        )

    def test_ground_truth_retained(self):
        s = synthesize([make_sinusoid(50, 0.1), make_sinusoid(50, 0.3)])
        assert s.n_components == 2
        assert s.truth_if().shape == (2, 50)

    def test_signal_rejects_empty_and_nan(self):
        with pytest.raises(InvalidParameterError):
            Signal(np.array([], complex))
        with pytest.raises(InvalidParameterError):
            Signal(np.array([1.0, np.nan]))


class TestNoise:
    def test_inf_is_identity(self, clean_signal):
        assert add_noise(clean_signal, math.inf, 3) is clean_signal

    def test_determinism(self, clean_signal):
        a = add_noise(clean_signal, 5.0, 7).samples
        b = add_noise(clean_signal, 5.0, 7).samples
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, add_noise(clean_signal, 5.0, 8).samples)

    def test_zero_energy(self):
        with pytest.raises(InvalidParameterError):
            add_noise(synthesize([], n_samples=10), 0.0, 0)

    def test_calibration_at_0db(self, clean_signal):
        snrs = [realized_snr(clean_signal.samples, add_noise(clean_signal, 0.0, s).samples) for s in range(100)]
        assert abs(np.mean(snrs)) <= 0.5
        # tighter calibration law over the same seeds
        assert abs(np.mean(snrs)) <= 0.2

    @pytest.mark.parametrize("snr", [-5.0, 10.0])
    def test_calibration_other_levels(self, clean_signal, snr):
        snrs = [realized_snr(clean_signal.samples, add_noise(clean_signal, snr, s).samples) for s in range(100)]
        assert abs(np.mean(snrs) - snr) <= 0.2

    def test_noise_variance_formula(self):
        x = np.ones(100, complex) * 2
        assert noise_variance(x, 10.0) == pytest.approx(0.4)

    def test_noise_is_circular(self, clean_signal):
        w = add_noise(clean_signal, 0.0, 1).samples - clean_signal.samples
        assert abs(np.var(w.real) / np.var(w.imag) - 1) < 0.3


class TestComponentSpec:
    def test_kinds(self):
        assert make_component({"kind": "sinusoid", "f0": 0.1}, 20).kind == "sinusoid"
        assert make_component({"kind": "chirp", "f_start": 0.1, "f_end": 0.2}, 20).kind == "chirp"
        c = make_component({"kind": "sin_fm", "f_center": 0.2, "f_dev": 0.01, "f_mod": 0.01}, 20)
        assert c.kind == "sin_fm"

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError):
            make_component({"kind": "square"}, 20)


class TestIO:
    def test_csv_roundtrip(self, tmp_path, clean_signal):
        write_csv(tmp_path / "x.csv", clean_signal.samples)
        np.testing.assert_array_equal(read_csv(tmp_path / "x.csv").samples, clean_signal.samples)

    def test_truth_roundtrip(self, tmp_path, clean_signal):
        write_truth_csv(tmp_path / "t.csv", clean_signal)
        np.testing.assert_array_equal(read_truth_csv(tmp_path / "t.csv"), clean_signal.truth_if())

    def test_empty_csv(self, tmp_path):
        (tmp_path / "e.csv").write_text("real,imag\n")
        with pytest.raises(InvalidParameterError):
            read_csv(tmp_path / "e.csv")

    def test_wav_is_analytic(self, tmp_path):
        x = synthesize([make_sinusoid(2000, 0.1)]).samples
        write_wav(tmp_path / "x.wav", x, rate=8000)
        y, rate = read_wav(tmp_path / "x.wav")
        assert rate == 8000
        spec = np.abs(np.fft.fft(y.samples))
        # negative frequencies are discarded by the analytic extension
        assert spec[1000:].sum() < 1e-3 * spec[:1000].sum()
        assert np.argmax(spec) == 200
        assert isinstance(load_signal(tmp_path / "x.wav"), Signal)
