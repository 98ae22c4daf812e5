import numpy as np
import pytest

from dtlink.metrics import (MetricsReport, best_phase_opening, dnl_inl,
                            enob_from_sndr, eye_diagram, nearest_coherent_bin,
                            power_fom, spectral_metrics)
from dtlink.reference_data import (ADC_PERFORMANCE, COMPARATOR_POWER_DIFF_W,
                                   DTLE_POWER_W, N_COMPARATORS, N_DTLE,
                                   POWER_BREAKDOWN_W)
from dtlink.signals import BitStream, SampledWaveform, gen_prbs, gen_sine, nrz_waveform

FS = 20e9
TAPS = -0.3 + (np.arange(15) + 1) * 0.6 / 16


def quantize(v, taps=TAPS):
    """Brute-force ideal 4-bit quantizer used as the reference route."""
    return np.searchsorted(np.sort(taps), v, side="left")


class TestEyeDiagram:
    def test_clean_nrz_opening_equals_swing(self):
        bits = gen_prbs(7, 0x11, 512)
        w = nrz_waveform(bits, 16, 0.6, 0.6, rise_time=10e-12)
        eye = eye_diagram(w, 1.0 / 20e9)
        assert eye.vertical_opening == pytest.approx(0.6, rel=0.02)
        assert eye.horizontal_opening > 0.5

    def test_too_short_record_rejected(self):
        w = SampledWaveform(np.ones(320), 320e9)
        with pytest.raises(ValueError):
            eye_diagram(w, 50e-12)

    def test_closed_eye_reports_zero_horizontal(self):
        rng = np.random.default_rng(2)
        w = SampledWaveform(rng.normal(0, 0.1, 320 * 16), 320e9)
        eye = eye_diagram(w, 50e-12)
        assert eye.vertical_opening < 5e-3
        if eye.vertical_opening == 0.0:
            assert eye.horizontal_opening == 0.0

    def test_phase_scan_finds_open_phase(self):
        bits = gen_prbs(7, 0x2B, 512)
        w = nrz_waveform(bits, 16, 0.6, 0.6, rise_time=20e-12)
        opening, phase = best_phase_opening(w, 50e-12)
        assert opening == pytest.approx(0.6, rel=0.05)


class TestSpectralMetrics:
    def test_ideal_quantizer_law(self):
        n = 4096
        m, fin = nearest_coherent_bin(FS, n, 9.84e9)
        t = np.arange(n) / FS
        codes = quantize(0.3 * np.sin(2 * np.pi * fin * t))
        res = spectral_metrics(codes, FS, fin, n)
        assert res.sndr_db == pytest.approx(25.84, abs=0.3)
        assert res.enob == pytest.approx(4.0, abs=0.05)

    def test_published_sndr_maps_to_published_enob(self):
        assert enob_from_sndr(23.86) == pytest.approx(3.67, abs=0.01)
        assert enob_from_sndr(ADC_PERFORMANCE["sndr_db"]) == pytest.approx(
            ADC_PERFORMANCE["enob_bits"], abs=0.01)

    def test_injected_spur_reads_back_in_sfdr(self):
        n = 4096
        m_sig, f_sig = nearest_coherent_bin(FS, n, 9.84e9)
        m_spur, f_spur = nearest_coherent_bin(FS, n, 3.77e9)
        t = np.arange(n) / FS
        spur_amp = 10 ** (-33.58 / 20.0)
        x = np.sin(2 * np.pi * f_sig * t) + spur_amp * np.sin(2 * np.pi * f_spur * t)
        res = spectral_metrics(x, FS, f_sig, n)
        assert res.sfdr_db == pytest.approx(33.58, abs=0.1)

    def test_non_coherent_rect_rejected_with_pointer(self):
        codes = np.zeros(4096)
        with pytest.raises(ValueError, match="cosine7"):
            spectral_metrics(codes, FS, 9.84e9, 4096)

    def test_cosine7_window_handles_non_coherent(self):
        n = 4096
        t = np.arange(n) / FS
        x = np.sin(2 * np.pi * 9.84e9 * t)        # deliberately non-coherent
        res = spectral_metrics(x, FS, 9.84e9, n, window="cosine7")
        assert res.sndr_db > 40.0                  # clean tone, no quantizer

    def test_enob_identity_holds(self):
        n = 4096
        m, fin = nearest_coherent_bin(FS, n, 4.84e9)
        t = np.arange(n) / FS
        codes = quantize(0.3 * np.sin(2 * np.pi * fin * t))
        res = spectral_metrics(codes, FS, fin, n)
        assert res.enob == (res.sndr_db - 1.76) / 6.02

    def test_parseval_consistency(self):
        rng = np.random.default_rng(4)
        x = rng.normal(0, 1, 4096)
        spectrum = np.fft.fft(x)
        freq_power = np.sum(np.abs(spectrum) ** 2) / len(x) ** 2
        time_power = np.mean(x ** 2)
        assert freq_power == pytest.approx(time_power, rel=1e-6)

    def test_nearest_coherent_bin_is_odd(self):
        for target in (4.84e9, 9.84e9, 1e9):
            m, fin = nearest_coherent_bin(FS, 4096, target)
            assert m % 2 == 1
            assert fin == m * FS / 4096


class TestDnlInl:
    @staticmethod
    def sine_codes(taps=TAPS, n=1 << 17, amp=0.312):
        m, fin = nearest_coherent_bin(FS, n, 0.997e9)
        t = np.arange(n) / FS
        return quantize(amp * np.sin(2 * np.pi * fin * t), taps)

    def test_ideal_quantizer_is_linear(self):
        dnl, inl = dnl_inl(self.sine_codes())
        assert len(dnl) == 15 and len(inl) == 16
        assert np.max(np.abs(dnl)) < 0.05
        assert inl[0] == 0.0

    def test_dnl_sums_to_zero_after_endpoint_fit(self):
        dnl, inl = dnl_inl(self.sine_codes())
        assert abs(dnl.sum()) < 0.01
        assert abs(inl[-1]) < 0.01

    def test_shifted_tap_shows_half_lsb_pair(self):
        taps = TAPS.copy()
        taps[7] += 0.5 * 0.6 / 16
        dnl, _ = dnl_inl(self.sine_codes(taps=taps))
        assert dnl[7] == pytest.approx(+0.5, abs=0.05)
        assert dnl[8] == pytest.approx(-0.5, abs=0.05)

    def test_threshold_offsets_raise_inl(self):
        rng = np.random.default_rng(3)
        taps = np.sort(TAPS + rng.normal(0, 14.4e-3, 15))
        _, inl_ref = dnl_inl(self.sine_codes())
        _, inl_off = dnl_inl(self.sine_codes(taps=taps))
        assert np.max(np.abs(inl_off)) > np.max(np.abs(inl_ref))

    def test_missing_rail_codes_rejected(self):
        codes = np.full(20000, 7)
        with pytest.raises(ValueError, match="rail"):
            dnl_inl(codes)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            dnl_inl(np.tile(np.arange(16), 10))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dnl_inl(np.array([], dtype=int))


class TestPowerFom:
    def test_ledger_total_matches_published_rounding(self):
        rep = power_fom(POWER_BREAKDOWN_W, 20e9, 3.67)
        assert rep.power_total == pytest.approx(15.54e-3, rel=1e-9)
        assert rep.power_total == pytest.approx(15.5e-3, abs=0.05e-3)

    def test_comparator_row_is_sixty_units(self):
        assert N_COMPARATORS * COMPARATOR_POWER_DIFF_W == pytest.approx(
            POWER_BREAKDOWN_W["comparators"], rel=1e-12)

    def test_walden_fom_reproduces_published_value(self):
        rep = power_fom({"adc": 15.5e-3}, 20e9, 3.67)
        assert rep.fomw == pytest.approx(60.8e-15, rel=0.005)

    def test_energy_per_bit_with_front_end(self):
        rep = power_fom({"adc": 15.5e-3}, 20e9, 3.67, bit_rate=20e9,
                        front_end={"equalizers": N_DTLE * DTLE_POWER_W})
        assert rep.energy_per_bit == pytest.approx(0.889e-12, rel=0.005)

    def test_no_bit_rate_no_energy(self):
        rep = power_fom({"adc": 1e-3}, 20e9, 4.0)
        assert rep.energy_per_bit is None

    def test_negative_entry_rejected(self):
        with pytest.raises(ValueError):
            power_fom({"bad": -1.0}, 20e9, 4.0)


class TestMetricsReport:
    def test_enob_identity_enforced(self):
        with pytest.raises(AssertionError):
            MetricsReport(sndr_db=20.0, sfdr_db=30.0, enob=4.0,
                          dnl=np.zeros(15), inl=np.zeros(16),
                          fomw=1e-13, power_total=1e-3)

    def test_text_and_csv(self, tmp_path):
        rep = MetricsReport(sndr_db=23.86, sfdr_db=33.58,
                            enob=enob_from_sndr(23.86),
                            dnl=np.zeros(15), inl=np.zeros(16),
                            fomw=60.8e-15, power_total=15.5e-3,
                            energy_per_bit=0.889e-12)
        text = rep.to_text()
        assert "23.86" in text and "fJ/conv-step" in text
        rep.to_csv(tmp_path / "m.csv")
        assert (tmp_path / "m.csv").read_text().startswith("metric,value")
