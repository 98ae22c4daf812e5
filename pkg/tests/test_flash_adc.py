import numpy as np
import pytest

from dtlink.comparator import ComparatorParams
from dtlink.flash_adc import (AdcConfig, LadderSpec, ThermometerWord,
                              adc_convert, build_ladder, draw_offsets,
                              encode_thermometer, gen_clock_phases,
                              thermometer_to_binary)
from dtlink.signals import SampledWaveform, gen_sine


def ideal_config(**kw):
    return AdcConfig(comparator=ComparatorParams(ideal=True, kickback=0.0), **kw)


class TestLadder:
    def test_midpoint_taps(self):
        lad = build_ladder(0.6, 4)
        assert lad.n_taps == 15
        assert lad.tap_voltages[0] == pytest.approx(-0.2625)
        assert lad.tap_voltages[-1] == pytest.approx(0.2625)
        assert np.allclose(np.diff(lad.tap_voltages), 0.0375)

    def test_single_bit_ladder(self):
        lad = build_ladder(0.6, 1)
        assert lad.n_taps == 1
        assert lad.tap_voltages[0] == pytest.approx(0.0, abs=1e-15)

    def test_antisymmetric(self):
        taps = build_ladder(0.6, 4).tap_voltages
        assert np.allclose(taps, -taps[::-1], atol=1e-15)

    def test_rejects_nonmonotone(self):
        with pytest.raises(ValueError):
            LadderSpec(tap_voltages=np.zeros(15))


class TestClockPhases:
    def test_four_channels_at_half_rate(self):
        s = gen_clock_phases(10e9)
        assert s.n_channels == 4
        assert s.frame_period == pytest.approx(200e-12)
        offsets = [c.phase_quarters * c.quarter for c in s.channels]
        assert np.allclose(offsets, [0.0, 50e-12, 100e-12, 150e-12])

    def test_union_tiles_uniformly(self):
        s = gen_clock_phases(10e9)
        inst = np.sort(np.concatenate(
            [s.sampling_instants(c, 50) for c in range(4)]))
        assert np.allclose(np.diff(inst), 50e-12, rtol=1e-9)

    def test_duty_cycles_exact(self):
        s = gen_clock_phases(10e9)
        for ch in s.channels:
            assert ch.high_fraction("clk1") == 0.25
            assert ch.high_fraction("clk2") == 0.5
            assert ch.high_fraction("clk3") == 0.75

    def test_regeneration_is_clk3_low_quarter(self):
        # CLK3 goes low for the last quarter of each channel's cycle
        s = gen_clock_phases(10e9)
        ch0 = s.channels[0]
        assert ch0.clk3 == ((0, 3),)
        assert ch0.clk1 == ((2, 3),)
        assert ch0.clk2 == ((0, 2),)


class TestThermometer:
    def test_encode_full_scale(self):
        lad = build_ladder()
        comp = ComparatorParams(ideal=True, kickback=0.0)
        w = encode_thermometer(+0.3, lad, comp, np.zeros(15))
        assert w.count() == 15
        w = encode_thermometer(-0.6, lad, comp, np.zeros(15))
        assert w.count() == 0

    def test_encode_midscale(self):
        lad = build_ladder()
        comp = ComparatorParams(ideal=True, kickback=0.0)
        w = encode_thermometer(0.0, lad, comp, np.zeros(15))
        assert w.count() == 7          # seven taps sit below 0 V
        assert w.is_monotone()

    def test_offsets_can_create_bubbles(self):
        lad = build_ladder()
        comp = ComparatorParams(ideal=True, kickback=0.0)
        offs = np.zeros(15)
        offs[7] = +0.05    # push one comparator's trip far up
        w = encode_thermometer(-0.01, lad, comp, offs)
        assert not w.is_monotone()

    def test_clean_word_counts(self):
        w = ThermometerWord.from_code(8)
        assert thermometer_to_binary(w, "majority") == 8
        assert thermometer_to_binary(w, "first-zero") == 8

    def test_bubble_word_majority(self):
        # LSB-first 1,1,1,1,0,1,0,... : majority-of-3 smooths to five ones
        bits = np.zeros(15, dtype=bool)
        bits[[0, 1, 2, 3, 5]] = True
        assert thermometer_to_binary(ThermometerWord(bits), "majority") == 5

    def test_extremes(self):
        zero = ThermometerWord(np.zeros(15, dtype=bool))
        full = ThermometerWord(np.ones(15, dtype=bool))
        for policy in ("majority", "first-zero"):
            assert thermometer_to_binary(zero, policy) == 0
            assert thermometer_to_binary(full, policy) == 15

    def test_monotone_words_map_to_count_under_both_policies(self):
        for code in range(16):
            w = ThermometerWord.from_code(code)
            assert thermometer_to_binary(w, "majority") == code
            assert thermometer_to_binary(w, "first-zero") == code

    def test_string_is_msb_first(self):
        assert ThermometerWord.from_code(3).as_string() == "0" * 12 + "111"


class TestAdcConvert:
    def test_slow_ramp_hits_all_codes_monotonically(self):
        v = np.linspace(-0.35, 0.35, 4000)
        conv = adc_convert(SampledWaveform(v, 20e9), ideal_config())
        assert np.all(np.diff(conv.codes) >= 0)
        assert set(conv.codes.tolist()) == set(range(16))

    def test_matches_direct_threshold_oracle(self):
        rng = np.random.default_rng(17)
        v = rng.uniform(-0.32, 0.32, 10000)
        cfg = ideal_config()
        conv = adc_convert(SampledWaveform(v, 20e9), cfg)
        taps = cfg.ladder.tap_voltages
        idx = np.round(conv.t * 20e9).astype(int)
        oracle = np.array([int(np.sum(v[i] > taps)) for i in idx])
        assert np.array_equal(conv.codes, oracle)

    def test_transitions_sit_at_ladder_taps(self):
        cfg = ideal_config()
        v = np.linspace(-0.31, 0.31, 20000)
        conv = adc_convert(SampledWaveform(v, 20e9), cfg)
        idx = np.round(conv.t * 20e9).astype(int)
        vals = v[idx]
        jumps = np.flatnonzero(np.diff(conv.codes) > 0)
        assert len(jumps) == 15
        step = v[1] - v[0]
        for j, tap in zip(jumps, cfg.ladder.tap_voltages):
            assert abs(vals[j + 1] - tap) <= step + 1e-12

    def test_quarter_rate_uses_channel_zero(self):
        tone = gen_sine(1e9, 0.5, 0.75, 20e9, 2000)
        conv = adc_convert(tone, ideal_config(rate_mode="quarter"))
        assert set(conv.channel.tolist()) == {0}
        spacing = np.diff(conv.t)
        assert np.allclose(spacing, 200e-12, rtol=1e-9)   # 5 GS/s

    def test_interleave_equivalence(self):
        rng = np.random.default_rng(9)
        v = rng.uniform(-0.3, 0.3, 8000)
        w = SampledWaveform(v, 20e9)
        cfg = ideal_config()
        full = adc_convert(w, cfg)
        for c in range(4):
            alone = adc_convert(w, ideal_config(active_channels=(c,)))
            mask = full.channel == c
            assert np.array_equal(full.codes[mask], alone.codes)
            assert np.allclose(full.t[mask], alone.t)

    def test_metastable_encodes_to_zero_and_counts(self):
        lad = build_ladder()
        # park the sample exactly on a tap: ideal comparator reports a tie
        v = np.full(40, lad.tap_voltages[7])
        conv = adc_convert(SampledWaveform(v, 20e9), ideal_config())
        assert conv.metastable_count == len(conv)
        assert np.all(conv.codes == 7)

    def test_short_waveform_rejected(self):
        with pytest.raises(ValueError):
            adc_convert(SampledWaveform(np.ones(2), 20e9), ideal_config())
        with pytest.raises(ValueError):
            adc_convert(SampledWaveform(np.ones(100), 20e9), ideal_config(),
                        n_frames=1000)

    def test_frozen_offsets_reused_per_bank(self):
        offs = draw_offsets(14.4e-3, seed=5)
        assert offs.shape == (4, 15)
        cfg = AdcConfig(comparator=ComparatorParams(ideal=True, kickback=0.0),
                        offsets=offs)
        tone = gen_sine(1e9, 0.55, 0.75, 20e9, 4000)
        a = adc_convert(tone, cfg)
        b = adc_convert(tone, cfg)
        assert np.array_equal(a.codes, b.codes)

    def test_output_words_are_monotone_after_policy(self):
        offs = draw_offsets(20e-3, seed=8)
        cfg = AdcConfig(comparator=ComparatorParams(ideal=True, kickback=0.0),
                        offsets=offs)
        tone = gen_sine(1e9, 0.6, 0.75, 20e9, 4000)
        conv = adc_convert(tone, cfg)
        words = conv.thermo
        assert np.all(words[:, :-1].astype(int) >= words[:, 1:].astype(int))

    def test_csv_format(self, tmp_path):
        tone = gen_sine(1e9, 0.5, 0.75, 20e9, 400)
        conv = adc_convert(tone, ideal_config())
        path = tmp_path / "codes.csv"
        conv.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t_s,channel,code,thermo_bits"
        assert len(lines) == len(conv) + 1
        assert len(lines[1].split(",")[3]) == 15
