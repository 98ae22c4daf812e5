"""Signal-quality and figure-of-merit computations.

Covers the receiver-side measurements used throughout the project:

* eye diagrams with a vertical opening measured over the center 10% of the
  unit interval,
* FFT-based SNDR / SFDR / ENOB on coherently sampled records (with a 7-term
  cosine window fallback for non-coherent tones),
* sine-histogram DNL / INL code-density estimation,
* the Walden figure of merit and the power/energy ledger arithmetic.

All functions are pure; nothing here touches global state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .signals import SampledWaveform

ENOB_OFFSET_DB = 1.76
ENOB_SLOPE_DB = 6.02

# Minimum-sidelobe 7-term cosine window coefficients (Albrecht's family);
# used only for non-coherent tones, where the rectangular window would leak.
_COSINE7 = np.array([
    2.712203605850388e-1,
    -4.334446123274422e-1,
    2.180041228929303e-1,
    -6.578534329560609e-2,
    1.076186730534183e-2,
    -7.700127105808265e-4,
    1.368088305992921e-5,
])
_COSINE7_HALF_LOBE = 7   # bins on each side of the carrier holding signal power


def enob_from_sndr(sndr_db: float) -> float:
    return (sndr_db - ENOB_OFFSET_DB) / ENOB_SLOPE_DB


# ---------------------------------------------------------------------------
# eye diagram
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EyeResult:
    """Folded two-UI histogram plus the scalar openings."""

    matrix: np.ndarray          # counts, shape (time_bins, volt_bins)
    time_edges: np.ndarray      # in UI, over [0, 2)
    volt_edges: np.ndarray
    vertical_opening: float     # V, at the UI center
    horizontal_opening: float   # fraction of the UI

    def __post_init__(self):
        if self.vertical_opening < 0:
            raise ValueError("vertical opening cannot be negative")


def eye_diagram(wave: SampledWaveform, ui: float, phase_offset: float = 0.0,
                time_bins: int = 64, volt_bins: int = 64,
                skip_ui: int = 0) -> EyeResult:
    """Fold a waveform modulo two unit intervals into an eye.

    The vertical opening is the gap between the lowest positive-rail sample
    and the highest negative-rail sample among samples whose phase falls in
    the center 10% of the UI (zero if the rails overlap or one rail is
    absent).  The horizontal opening is the fraction of UI phases whose
    per-phase gap is at least half the center gap; it is a display metric and
    zero whenever the center is closed.  ``skip_ui`` drops leading intervals
    (filter warm-up).
    """
    n_ui = len(wave) / (ui * wave.sample_rate)
    if n_ui < 100:
        raise ValueError("record too short: eye needs >= 100 unit intervals")
    t = wave.times()
    v = wave.samples
    if skip_ui:
        keep = t - wave.t0 >= skip_ui * ui
        t, v = t[keep], v[keep]
    phase2 = ((t - wave.t0 - phase_offset) / ui) % 2.0
    matrix, te, ve = np.histogram2d(phase2, v, bins=[time_bins, volt_bins],
                                    range=[[0.0, 2.0], [v.min(), v.max()]])
    phase1 = phase2 % 1.0
    center = (phase1 >= 0.45) & (phase1 <= 0.55)
    vertical = _rail_gap(v[center])
    if vertical > 0.0:
        bins = np.minimum((phase1 * time_bins).astype(int), time_bins - 1)
        up_min = np.full(time_bins, np.inf)
        dn_max = np.full(time_bins, -np.inf)
        pos, neg = v > 0, v < 0
        np.minimum.at(up_min, bins[pos], v[pos])
        np.maximum.at(dn_max, bins[neg], v[neg])
        gaps = up_min - dn_max
        ok = np.isfinite(gaps) & (gaps >= 0.5 * vertical)
        horizontal = float(np.count_nonzero(ok)) / time_bins
    else:
        horizontal = 0.0
    return EyeResult(matrix=matrix, time_edges=te, volt_edges=ve,
                     vertical_opening=vertical, horizontal_opening=horizontal)


def _rail_gap(vals: np.ndarray) -> float:
    upper = vals[vals > 0]
    lower = vals[vals < 0]
    if upper.size == 0 or lower.size == 0:
        return 0.0
    return max(0.0, float(upper.min() - lower.max()))


def best_phase_opening(wave: SampledWaveform, ui: float, n_phases: int = 16,
                       skip_ui: int = 0) -> tuple[float, float]:
    """(max vertical opening, its phase offset) over a phase scan.

    Only the center-window gap is evaluated per phase, which keeps the scan
    cheap; call :func:`eye_diagram` at the winning phase for the histogram.
    """
    t = wave.times()
    v = wave.samples
    if skip_ui:
        keep = t - wave.t0 >= skip_ui * ui
        t, v = t[keep], v[keep]
    best = (0.0, 0.0)
    for k in range(n_phases):
        off = k * ui / n_phases
        phase1 = ((t - wave.t0 - off) / ui) % 1.0
        center = (phase1 >= 0.45) & (phase1 <= 0.55)
        gap = _rail_gap(v[center])
        if gap > best[0]:
            best = (gap, off)
    return best


# ---------------------------------------------------------------------------
# spectral metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralResult:
    sndr_db: float
    sfdr_db: float
    enob: float
    freqs: np.ndarray
    power_dbc: np.ndarray       # one-sided, relative to the carrier
    signal_bin: int

    def __post_init__(self):
        assert abs(self.enob - enob_from_sndr(self.sndr_db)) < 1e-12

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("f_hz,power_dbc\n")
            for f, p in zip(self.freqs, self.power_dbc):
                fh.write(f"{f:.17g},{p:.17g}\n")


def nearest_coherent_bin(fs: float, n_fft: int, f_target: float) -> tuple[int, float]:
    """Nearest odd bin index m and its exact frequency m*fs/n_fft."""
    m = int(round(f_target * n_fft / fs))
    if m % 2 == 0:
        m += 1 if f_target * n_fft / fs >= m else -1
    m = max(m, 1)
    return m, m * fs / n_fft


def spectral_metrics(codes, fs: float, fin: float, n_fft: int = 4096,
                     window: str = "rect") -> SpectralResult:
    """SNDR/SFDR/ENOB from the DFT of a converter output record.

    Rectangular-window analysis demands coherent sampling, fin = m*fs/n_fft
    with m odd (and hence co-prime to a power-of-two record); a non-coherent
    tone raises with a pointer to the 7-term cosine window mode.  The signal
    is the fin bin; noise-and-distortion is everything else except DC; the
    spur search excludes DC and the signal bin +/- 1.
    """
    x = np.asarray(codes, dtype=float)
    if len(x) < n_fft:
        raise ValueError(f"need at least n_fft={n_fft} samples, got {len(x)}")
    x = x[:n_fft]
    m_float = fin * n_fft / fs
    m = int(round(m_float))
    if window == "rect":
        if abs(m_float - m) > 1e-6 or m % 2 == 0 or m <= 0 or m >= n_fft // 2:
            raise ValueError(
                "fin is not coherent (need fin = m*fs/n_fft with m odd); "
                "re-run with window='cosine7' for leakage-controlled analysis")
        w = np.ones(n_fft)
        half_lobe = 0
    elif window == "cosine7":
        k = np.arange(n_fft)
        w = np.zeros(n_fft)
        for j, a in enumerate(_COSINE7):
            w += a * np.cos(2.0 * np.pi * j * k / n_fft)
        half_lobe = _COSINE7_HALF_LOBE
    else:
        raise ValueError("window must be 'rect' or 'cosine7'")
    x = (x - x.mean()) * w
    spectrum = np.fft.rfft(x)
    power = np.abs(spectrum) ** 2
    n_bins = len(power)
    sig_lo, sig_hi = max(m - half_lobe, 1), min(m + half_lobe, n_bins - 1)
    p_signal = power[sig_lo:sig_hi + 1].sum()
    dc_hi = min(half_lobe, n_bins - 1)
    p_exclude = p_signal + power[0:dc_hi + 1].sum()
    p_noise = power.sum() - p_exclude
    sndr = 10.0 * math.log10(p_signal / max(p_noise, 1e-300))
    spur = power.copy()
    spur[0:dc_hi + 1] = 0.0
    spur[max(sig_lo - 1, 0):sig_hi + 2] = 0.0
    sfdr = 10.0 * math.log10(p_signal / max(spur.max(), 1e-300))
    dbc = 10.0 * np.log10(np.maximum(power, 1e-300) / p_signal)
    freqs = np.fft.rfftfreq(n_fft, 1.0 / fs)
    return SpectralResult(sndr_db=sndr, sfdr_db=sfdr, enob=enob_from_sndr(sndr),
                          freqs=freqs, power_dbc=dbc, signal_bin=m)


# ---------------------------------------------------------------------------
# DNL / INL (sine histogram code density)
# ---------------------------------------------------------------------------

def dnl_inl(codes, n_bits: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Code-density DNL and INL from a full-scale sine record.

    The input must slightly overdrive both rails so the end codes have mass.
    Transition levels come from the arcsine inversion of the cumulative
    histogram; the effective LSB is the endpoint-fit step.  DNL has one entry
    per transition step (the first is the zero reference), INL is the
    cumulative sum prefixed with zero, so the endpoint correction forces
    INL[0] = INL[-1] = 0 for an ideal converter.
    """
    codes = np.asarray(codes)
    n_levels = 2 ** n_bits
    if codes.size == 0:
        raise ValueError("empty code record")
    if codes.size < n_levels * 1000:
        raise ValueError(f"need >= {n_levels * 1000} samples for a stable histogram")
    hist = np.bincount(codes.astype(np.int64), minlength=n_levels).astype(float)
    if len(hist) > n_levels:
        raise ValueError("codes exceed the stated resolution")
    if hist[0] == 0 or hist[-1] == 0:
        raise ValueError("rail codes missing: the sine must overdrive both ends")
    total = hist.sum()
    cum = np.cumsum(hist)[:-1]
    transitions = -np.cos(np.pi * cum / total)     # normalized, amplitude-free
    lsb = (transitions[-1] - transitions[0]) / (n_levels - 2)
    dnl = np.zeros(n_levels - 1)
    dnl[1:] = np.diff(transitions) / lsb - 1.0
    inl = np.concatenate([[0.0], np.cumsum(dnl)])
    return dnl, inl


# ---------------------------------------------------------------------------
# power / figure of merit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerReport:
    power_total: float              # converter ledger sum, W
    fomw: float                     # J per conversion step
    energy_per_bit: float | None    # J/bit including any front-end entries
    ledger: Mapping[str, float] = field(default_factory=dict)
    front_end: Mapping[str, float] = field(default_factory=dict)


def power_fom(ledger: Mapping[str, float], fs: float, enob: float,
              bit_rate: float | None = None,
              front_end: Mapping[str, float] | None = None) -> PowerReport:
    """Ledger arithmetic: total power, Walden FOM, and energy per bit.

    fomw = power_total / (fs * 2^enob).  The energy per bit divides the
    ledger total plus any front-end entries by the line rate; it is None when
    no bit rate is given.  Power is declared, never estimated.
    """
    for name, value in ledger.items():
        if value < 0:
            raise ValueError(f"ledger entry {name!r} must be >= 0")
    front_end = dict(front_end or {})
    for name, value in front_end.items():
        if value < 0:
            raise ValueError(f"front-end entry {name!r} must be >= 0")
    power_total = float(sum(ledger.values()))
    fomw = power_total / (fs * 2.0 ** enob)
    energy = None
    if bit_rate:
        energy = (power_total + sum(front_end.values())) / bit_rate
    return PowerReport(power_total=power_total, fomw=fomw, energy_per_bit=energy,
                       ledger=dict(ledger), front_end=front_end)


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsReport:
    sndr_db: float
    sfdr_db: float
    enob: float
    dnl: np.ndarray
    inl: np.ndarray
    fomw: float
    power_total: float
    energy_per_bit: float | None = None
    vertical_eye_v: float | None = None
    horizontal_eye_ui: float | None = None

    def __post_init__(self):
        assert abs(self.enob - enob_from_sndr(self.sndr_db)) < 1e-12

    def to_text(self) -> str:
        lines = [
            "converter performance summary",
            "-----------------------------",
            f"SNDR            : {self.sndr_db:8.2f} dB",
            f"SFDR            : {self.sfdr_db:8.2f} dB",
            f"ENOB            : {self.enob:8.3f} bits",
            f"DNL (max |.|)   : {np.max(np.abs(self.dnl)):8.3f} LSB",
            f"INL (max |.|)   : {np.max(np.abs(self.inl)):8.3f} LSB",
            f"power total     : {self.power_total * 1e3:8.3f} mW",
            f"FOMW            : {self.fomw * 1e15:8.2f} fJ/conv-step",
        ]
        if self.energy_per_bit is not None:
            lines.append(f"energy per bit  : {self.energy_per_bit * 1e12:8.4f} pJ/bit")
        if self.vertical_eye_v is not None:
            lines.append(f"eye (vertical)  : {self.vertical_eye_v * 1e3:8.2f} mV")
        if self.horizontal_eye_ui is not None:
            lines.append(f"eye (horizontal): {self.horizontal_eye_ui:8.3f} UI")
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("metric,value\n")
            fh.write(f"sndr_db,{self.sndr_db:.17g}\n")
            fh.write(f"sfdr_db,{self.sfdr_db:.17g}\n")
            fh.write(f"enob,{self.enob:.17g}\n")
            fh.write(f"power_total_w,{self.power_total:.17g}\n")
            fh.write(f"fomw_j,{self.fomw:.17g}\n")
            if self.energy_per_bit is not None:
                fh.write(f"energy_per_bit_j,{self.energy_per_bit:.17g}\n")
            for i, d in enumerate(self.dnl):
                fh.write(f"dnl_{i},{d:.17g}\n")
            for i, v in enumerate(self.inl):
                fh.write(f"inl_{i},{v:.17g}\n")
