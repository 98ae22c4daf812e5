import numpy as np
import pytest

from dtlink.signals import (PRBS_TAPS, BitStream, SampledWaveform, gen_prbs,
                            gen_sine, nrz_waveform)


def lfsr_oracle(order, seed, n_bits):
    """Sequence-recurrence oracle: y[m] = y[m-n] ^ y[m-n+k] for x^n+x^k+1.

    Structured as a running bit list rather than a shift register, so it is
    an independent route to the same sequence.
    """
    _, k = PRBS_TAPS[order]
    y = [(seed >> i) & 1 for i in range(order)]
    while len(y) < n_bits:
        y.append(y[-order] ^ y[-order + k])
    return y[:n_bits]


def find_period(bits):
    n = len(bits)
    for p in range(1, n):
        if all(bits[i] == bits[i + p] for i in range(n - p)):
            return p
    return n


class TestGenPrbs:
    def test_matches_bitwise_oracle(self):
        out = gen_prbs(7, 0b1111111, 10)
        assert list(out.bits) == lfsr_oracle(7, 0b1111111, 10)

    def test_period_is_maximal_order7(self):
        out = gen_prbs(7, 0x55, 254)
        assert find_period(list(out.bits)) == 127

    def test_period_is_maximal_order9(self):
        out = gen_prbs(9, 0x1FF, 1022)
        assert find_period(list(out.bits)) == 511

    def test_balance_over_one_period(self):
        for order in (7, 9):
            period = 2 ** order - 1
            bits = gen_prbs(order, 1, period).bits
            assert bits.sum() == 2 ** (order - 1)
            assert period - bits.sum() == 2 ** (order - 1) - 1

    def test_empty(self):
        assert len(gen_prbs(7, 1, 0)) == 0

    def test_deterministic(self):
        a = gen_prbs(15, 0xACE, 500).bits
        b = gen_prbs(15, 0xACE, 500).bits
        assert np.array_equal(a, b)

    def test_zero_seed_rejected(self):
        with pytest.raises(ValueError, match="lock-up"):
            gen_prbs(7, 0, 10)
        # seed nonzero only above the register width is still lock-up
        with pytest.raises(ValueError):
            gen_prbs(7, 1 << 10, 10)

    def test_bad_order_rejected(self):
        with pytest.raises(ValueError):
            gen_prbs(8, 1, 10)


class TestNrzWaveform:
    def test_constant_one_bit(self):
        w = nrz_waveform(BitStream([1], 20e9), samples_per_bit=8, swing=0.6,
                         common_mode=0.6, rise_time=0.0)
        assert np.all(w.samples == 0.3)
        assert w.sample_rate == 20e9 * 8

    def test_ideal_edge_steps_at_boundary(self):
        w = nrz_waveform(BitStream([1, 0], 20e9), samples_per_bit=8, swing=1.0,
                         rise_time=0.0)
        assert np.all(w.samples[:8] == 0.5)
        assert np.all(w.samples[8:] == -0.5)

    def test_edge_midpoint_is_zero(self):
        # rise time of half a UI: the mid-ramp sample must land on 0 V
        bits = BitStream([1, 0, 1, 0, 1, 0], 20e9)
        w = nrz_waveform(bits, samples_per_bit=16, swing=1.0,
                         rise_time=0.5 / 20e9)
        for i in range(1, 6):
            assert w.samples[i * 16 + 4] == pytest.approx(0.0, abs=1e-15)

    def test_ramp_is_linear(self):
        bits = BitStream([0, 1], 20e9)
        w = nrz_waveform(bits, samples_per_bit=16, swing=1.0,
                         rise_time=0.5 / 20e9)
        ramp = w.samples[16:24]
        assert np.allclose(np.diff(ramp), np.diff(ramp)[0])

    def test_rise_time_too_long_rejected(self):
        with pytest.raises(ValueError):
            nrz_waveform(BitStream([1, 0], 20e9), 16, 1.0, 0.6,
                         rise_time=1.0 / 20e9)

    def test_min_oversampling(self):
        with pytest.raises(ValueError):
            nrz_waveform(BitStream([1], 20e9), samples_per_bit=2)


class TestGenSine:
    def test_amplitude_convention(self):
        # peak-to-peak differential 0.6 V -> differential peaks at +/-0.3 V
        w = gen_sine(9.84e9, 0.6, 0.75, 80e9, 8000)
        assert w.samples.max() == pytest.approx(0.3, rel=1e-3)
        assert w.samples.min() == pytest.approx(-0.3, rel=1e-3)
        assert w.common_mode == 0.75

    def test_zero_amplitude(self):
        w = gen_sine(1e9, 0.0, 0.0, 20e9, 100)
        assert np.all(w.samples == 0.0)

    def test_coherent_tone_occupies_one_bin(self):
        n, m = 1024, 171        # odd bin -> no leakage with a bare DFT
        fs = 20e9
        w = gen_sine(m * fs / n, 0.6, 0.0, fs, n)
        power = np.abs(np.fft.rfft(w.samples)) ** 2
        others = power.sum() - power[m]
        assert others / power[m] < 1e-24

    def test_nyquist_rejected(self):
        with pytest.raises(ValueError):
            gen_sine(10e9, 0.6, 0.0, 20e9, 64)


class TestSampledWaveform:
    def test_legs_reconstruct(self):
        w = SampledWaveform([0.2, -0.2], 1e9, common_mode=0.75)
        p, n = w.legs()
        assert np.allclose(p - n, w.samples)
        assert np.allclose((p + n) / 2, 0.75)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            SampledWaveform([np.nan], 1e9)
        with pytest.raises(ValueError):
            SampledWaveform([1.0], 0.0)

    def test_csv_roundtrip_precision(self, tmp_path):
        w = SampledWaveform([1.0 / 3.0, -2.0 / 7.0], 20e9, common_mode=0.75)
        path = tmp_path / "wave.csv"
        w.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t_s,v_diff,v_cm"
        t, v, cm = map(float, lines[1].split(","))
        assert v == 1.0 / 3.0 and cm == 0.75 and t == 0.0
