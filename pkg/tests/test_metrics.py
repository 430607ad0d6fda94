"""Echo window detection, efficiency and fidelity."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gammaecho import (
    FE57,
    EchoDetectionError,
    EchoWindow,
    FieldTrace,
    PulseSpec,
    build_flat_comb,
    detect_window,
    efficiency,
    expected_echo_time,
    fidelity,
    report,
)

DELAY_S50 = 2.0 * math.pi / (50.0 * FE57.gamma)


def gaussian_trace(centers_amps, tau_p=2.0, t0=0.0, t1=100.0, dt=0.05):
    t = np.arange(t0, t1 + dt / 2, dt)
    y = np.zeros_like(t, dtype=complex)
    for c, a in centers_amps:
        y += a * np.exp(-(((t - c) / tau_p) ** 2))
    return FieldTrace(t0, dt, y)


class TestExpectedEchoTime:
    def test_reference_value(self):
        assert expected_echo_time(20.0, 50.0) == pytest.approx(20.0 + DELAY_S50, rel=1e-12)
        assert expected_echo_time(20.0, 50.0) == pytest.approx(37.73, abs=0.01)

    def test_large_spacing_limit(self):
        assert expected_echo_time(20.0, 1e12) == pytest.approx(20.0, abs=1e-9)

    def test_inverse_spacing_scaling(self):
        d50 = expected_echo_time(0.0, 50.0)
        d25 = expected_echo_time(0.0, 25.0)
        assert d25 == pytest.approx(2.0 * d50, rel=1e-12)

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            expected_echo_time(0.0, 0.0)


class TestDetectWindow:
    def test_brackets_the_second_gaussian(self):
        trace = gaussian_trace([(20.0, 1.0), (40.0, 1.0)])
        w = detect_window(trace, tau_i=20.0, tau_p=2.0)
        assert 28.0 <= w.t1 <= 32.0
        assert 47.0 <= w.t2 <= 52.0

    def test_no_echo_after_the_pulse(self):
        trace = gaussian_trace([(20.0, 1.0)])
        with pytest.raises(EchoDetectionError):
            detect_window(trace, tau_i=20.0, tau_p=2.0)

    def test_zero_trace(self):
        trace = FieldTrace(0.0, 0.1, np.zeros(1000, complex))
        with pytest.raises(EchoDetectionError):
            detect_window(trace, tau_i=20.0, tau_p=2.0)

    def test_amplitude_scaling_invariance(self):
        trace = gaussian_trace([(20.0, 1.0), (40.0, 0.3)])
        w1 = detect_window(trace, 20.0, 2.0)
        w2 = detect_window(trace.scaled(3.7e6j), 20.0, 2.0)
        assert w1 == w2

    def test_hint_selects_the_near_echo(self):
        # two revivals; the hint keeps detection on the first one
        trace = gaussian_trace([(20.0, 1.0), (37.7, 0.5), (55.4, 0.6)])
        w = detect_window(trace, 20.0, 2.0, hint_echo_time=37.7)
        assert w.t1 < 37.7 < w.t2 < 50.0

    def test_window_ordering_invariant(self):
        with pytest.raises(ValueError):
            EchoWindow(5.0, 5.0)


class TestEfficiency:
    def test_full_shifted_copy(self):
        inp = gaussian_trace([(20.0, 1.0)])
        out = gaussian_trace([(60.0, 1.0)])
        assert efficiency(inp, out, EchoWindow(40.0, 80.0)) == pytest.approx(1.0, abs=1e-9)

    def test_half_amplitude_copy(self):
        inp = gaussian_trace([(20.0, 1.0)])
        out = gaussian_trace([(60.0, 0.5)])
        assert efficiency(inp, out, EchoWindow(40.0, 80.0)) == pytest.approx(0.25, abs=1e-9)

    def test_zero_output_window(self):
        inp = gaussian_trace([(20.0, 1.0)])
        out = gaussian_trace([(20.0, 1.0)])
        assert efficiency(inp, out, EchoWindow(60.0, 80.0)) == pytest.approx(0.0, abs=1e-12)

    def test_monotone_in_window_growth(self):
        inp = gaussian_trace([(20.0, 1.0)])
        out = gaussian_trace([(50.0, 0.8)])
        values = [
            efficiency(inp, out, EchoWindow(50.0 - h, 50.0 + h)) for h in (2.0, 5.0, 10.0, 20.0)
        ]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_zero_input_rejected(self):
        zero = FieldTrace(0.0, 0.1, np.zeros(100, complex))
        out = gaussian_trace([(50.0, 1.0)])
        with pytest.raises(ValueError):
            efficiency(zero, out, EchoWindow(40.0, 60.0))


class TestFidelity:
    def test_exact_scaled_shifted_copy(self):
        inp = gaussian_trace([(20.0, 1.0)])
        shift = 30.0  # a whole number of samples
        out = inp.scaled(0.4 - 0.9j)
        out = FieldTrace(out.t_start, out.dt, np.roll(out.samples, int(round(shift / out.dt))))
        f = fidelity(inp, out, EchoWindow(30.0, 70.0), shift)
        assert f == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_output(self):
        # odd derivative profile against the even input integrates to zero
        t = np.arange(0.0, 100.0 + 0.025, 0.05)
        inp = FieldTrace(0.0, 0.05, np.exp(-(((t - 20.0) / 2.0) ** 2)).astype(complex))
        out = FieldTrace(0.0, 0.05, ((t - 50.0) * np.exp(-(((t - 50.0) / 2.0) ** 2))).astype(complex))
        f = fidelity(inp, out, EchoWindow(40.0, 60.0), 30.0)
        assert f < 1e-12

    def test_bounded_by_one(self):
        rng = np.random.default_rng(9)
        inp = gaussian_trace([(20.0, 1.0)])
        for _ in range(20):
            y = rng.normal(size=inp.n) + 1j * rng.normal(size=inp.n)
            out = FieldTrace(inp.t_start, inp.dt, y * np.exp(-(((inp.times - 50) / 10.0) ** 2)))
            f = fidelity(inp, out, EchoWindow(35.0, 65.0), 30.0)
            assert f <= 1.0 + 1e-9

    @given(scale=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
    @settings(max_examples=30, deadline=None)
    def test_joint_scaling_invariance(self, scale):
        inp = gaussian_trace([(20.0, 1.0)])
        out = gaussian_trace([(50.0, 0.5)])
        w = EchoWindow(40.0, 60.0)
        base_e = efficiency(inp, out, w)
        base_f = fidelity(inp, out, w, 30.0)
        assert efficiency(inp.scaled(scale), out.scaled(scale), w) == pytest.approx(base_e, rel=1e-9)
        assert fidelity(inp.scaled(scale), out.scaled(scale), w, 30.0) == pytest.approx(base_f, rel=1e-9)

    def test_rejects_non_finite_shift(self):
        inp = gaussian_trace([(20.0, 1.0)])
        with pytest.raises(ValueError):
            fidelity(inp, inp, EchoWindow(10.0, 30.0), float("nan"))


class TestReport:
    def test_transparent_chain_has_no_echo(self):
        inp = gaussian_trace([(20.0, 1.0)])
        comb = build_flat_comb(3, 50.0, 0.0)
        with pytest.raises(EchoDetectionError):
            report(inp, inp, PulseSpec(2.0, 20.0), comb)

    def test_static_comb_report_fields(self):
        from gammaecho import sample_pulse, series_trace

        pulse = PulseSpec(tau_p=5.0, tau_i=25.0)
        comb = build_flat_comb(3, 50.0, 8.0)
        out = series_trace(pulse, comb)
        inp = sample_pulse(pulse, out.t_start, out.dt, out.n)
        rep = report(inp, out, pulse, comb)
        assert rep.shift_used == pytest.approx(DELAY_S50, rel=1e-12)
        assert 0.0 < rep.efficiency < 1.0
        assert rep.window.t1 < rep.echo_peak < rep.window.t2
        assert rep.echo_energy == pytest.approx(rep.efficiency * rep.input_energy, rel=1e-12)
        record = rep.as_record()
        assert set(record) == {
            "efficiency", "fidelity", "window_t1_ns", "window_t2_ns",
            "echo_peak_ns", "echo_energy", "input_energy", "shift_ns",
        }

    def test_shift_modes(self):
        from gammaecho import sample_pulse, series_trace

        pulse = PulseSpec(tau_p=5.0, tau_i=25.0)
        comb = build_flat_comb(3, 50.0, 7.0)
        out = series_trace(pulse, comb)
        inp = sample_pulse(pulse, out.t_start, out.dt, out.n)
        expected = report(inp, out, pulse, comb, shift_mode="expected")
        peak = report(inp, out, pulse, comb, shift_mode="peak")
        optimized = report(inp, out, pulse, comb, shift_mode="optimize")
        assert optimized.fidelity >= max(expected.fidelity, peak.fidelity) - 1e-12
        assert peak.shift_used == pytest.approx(peak.echo_peak - pulse.tau_i)
        with pytest.raises(ValueError):
            report(inp, out, pulse, comb, shift_mode="bogus")


class TestFidelityDenominator:
    def test_zero_windowed_output_rejected(self):
        inp = gaussian_trace([(20.0, 1.0)])
        out = FieldTrace(inp.t_start, inp.dt, np.zeros(inp.n, complex))
        with pytest.raises(ValueError):
            fidelity(inp, out, EchoWindow(40.0, 60.0), 30.0)
