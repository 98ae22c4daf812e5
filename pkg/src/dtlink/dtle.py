"""Discrete-time linear equalizer: peaking amplifier while tracking, frozen
output while holding.

During the track window the stage is a capacitively degenerated differential
pair with a clocked resistive load: one zero, two poles.  When the clock
drops the load switches open and the output freezes; with the tail reset
devices enabled the held value is ideal, otherwise it droops exponentially
toward the common mode.  The value held at the end of each clock period is
the sample the downstream converter sees, so the stage doubles as the
sample-and-hold.

Closed forms implemented here:

    w_z  = 1 / (Rs Cs)
    w_p1 = (1 + (gm + gmb) Rs / 2) / (Rs Cs)
    w_p2 = 1 / (Rd C_load)
    Rd   = 1 / (mu Cox W/L (|Vgs| - |Vth|))        (clocked PMOS load)
    dc   = (gm + gmb) Rd / (1 + (gm + gmb) Rs / 2)
    hi   = gm Rd
    peaking = hi / dc
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig

from .signals import SampledWaveform


@dataclass(frozen=True)
class DtleParams:
    """Small-signal and clocking parameters of one equalizer slice."""

    gm: float = 20e-3           # input-pair transconductance, S
    gmb: float = 2e-3           # body transconductance, S
    rs: float = 1500.0          # degeneration resistor, ohm
    cs: float = 0.106e-12       # degeneration capacitor, F
    rd: float = 500.0           # clocked PMOS load resistance, ohm
    c_load: float = 8.0e-15     # output node capacitance, F
    clk_freq: float = 5e9       # track/hold clock, Hz
    track_duty: float = 0.5     # fraction of the period spent tracking
    leakage_tau: float = 1e-9   # hold droop time constant, s (no blockers)
    blockers_enabled: bool = True

    def __post_init__(self):
        for name in ("gm", "rs", "cs", "rd", "c_load", "clk_freq", "leakage_tau"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.gmb < 0:
            raise ValueError("gmb must be >= 0")
        if not 0.0 < self.track_duty < 1.0:
            raise ValueError("track_duty must be in (0, 1)")


@dataclass(frozen=True)
class SwitchDevice:
    """Clocked PMOS load described by mu_p*Cox*(W/L) and its drive voltages."""

    mu_cox_wl: float    # A/V^2
    vgs: float
    vth: float

    def __post_init__(self):
        if self.mu_cox_wl <= 0:
            raise ValueError("mu_cox_wl must be positive")


def dtle_poles_zero(params: DtleParams) -> tuple[float, float, float]:
    """(w_z, w_p1, w_p2) in rad/s.

    w_p1 is built as (1 + (gm+gmb) Rs/2) * w_z so the pole/zero ratio identity
    is exact in floating point, not just algebraically.
    """
    wz = 1.0 / (params.rs * params.cs)
    wp1 = (1.0 + (params.gm + params.gmb) * params.rs / 2.0) * wz
    wp2 = 1.0 / (params.rd * params.c_load)
    return wz, wp1, wp2


def dtle_gains(params: DtleParams) -> tuple[float, float, float]:
    """(dc_gain, hifreq_gain, peaking); peaking = hifreq/dc."""
    gsum = params.gm + params.gmb
    dc = gsum * params.rd / (1.0 + gsum * params.rs / 2.0)
    hi = params.gm * params.rd
    return dc, hi, hi / dc


def rd_of_switch(dev: SwitchDevice) -> float:
    """Linear-region resistance of the clocked PMOS load."""
    overdrive = abs(dev.vgs) - abs(dev.vth)
    if overdrive <= 0:
        raise ValueError("|vgs| must exceed |vth| (switch not in linear region)")
    return 1.0 / (dev.mu_cox_wl * overdrive)


def dtle_frequency_response(params: DtleParams, f) -> np.ndarray | complex:
    """Track-mode small-signal gain H(j 2 pi f).

    H(s) = dc (1 + s/w_z) / ((1 + s/w_p1)(1 + s/w_p2)); |H(0)| is the DC gain
    and the mid-band plateau approaches gm*Rd once the poles are separated.
    """
    wz, wp1, wp2 = dtle_poles_zero(params)
    dc, _, _ = dtle_gains(params)
    s = 2j * np.pi * np.asarray(f, dtype=float)
    h = dc * (1.0 + s / wz) / ((1.0 + s / wp1) * (1.0 + s / wp2))
    return h if h.ndim else complex(h)


def _tf_coeffs(params: DtleParams, sample_rate: float):
    """Bilinear (trapezoidal) discretization of the track-mode H(s)."""
    wz, wp1, wp2 = dtle_poles_zero(params)
    dc, _, _ = dtle_gains(params)
    num = dc * np.array([1.0 / wz, 1.0])
    den = np.convolve([1.0 / wp1, 1.0], [1.0 / wp2, 1.0])
    return _sig.bilinear(num, den, sample_rate)


def dtle_process(wave: SampledWaveform, params: DtleParams,
                 clk_phase: float = 0.0) -> SampledWaveform:
    """Run the track-and-equalize / hold state machine over a waveform.

    The first ``track_duty`` of each clock period integrates the input
    through the two-state realization of H(s) (trapezoidal rule at the
    waveform rate, state carried across windows); the rest of the period the
    output is frozen at the last track value, or decays toward the common
    mode with ``leakage_tau`` when the tail blockers are disabled.
    ``clk_phase`` shifts this stage's clock, which is how the four
    interleaved slices are staggered.
    """
    out, _, _ = _track_hold(wave, params, clk_phase)
    return wave.with_samples(out)


def delivered_samples(wave: SampledWaveform, params: DtleParams,
                      clk_phase: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """(hold-start times, held values) for each complete clock period.

    The value frozen when tracking stops is what the converter samples; it is
    available from the start of the hold window and (with blockers on) is
    identical to the end-of-period value.
    """
    _, times, values = _track_hold(wave, params, clk_phase)
    return times, values


def _track_hold(wave: SampledWaveform, params: DtleParams, clk_phase: float):
    if wave.sample_rate < 8.0 * params.clk_freq:
        raise ValueError("waveform sample rate must be >= 8x the DTLE clock")
    b, a = _tf_coeffs(params, wave.sample_rate)
    period = 1.0 / params.clk_freq
    x = wave.samples
    t = wave.times()
    n = len(x)
    out = np.zeros(n)
    if n == 0:
        return out, np.empty(0), np.empty(0)
    # which clock period each sample falls in; samples with phase fraction
    # below track_duty are track samples (always a prefix of the period).
    # The epsilon snaps float noise at exact window boundaries to a
    # consistent side; it is a billionth of a period, far below one sample.
    eps = 1e-9
    rel = (t - wave.t0 - clk_phase) / period
    pidx = np.floor(rel + eps).astype(np.int64)
    in_track = (rel - pidx) < params.track_duty - eps
    periods = np.arange(pidx[0], pidx[-1] + 1)
    bounds = np.searchsorted(pidx, np.append(periods, pidx[-1] + 1))
    zi = np.zeros(max(len(a), len(b)) - 1)
    held = 0.0
    held_at = t[0]
    hold_times, hold_values = [], []
    for j in range(len(periods)):
        s, e = bounds[j], bounds[j + 1]
        if s == e:
            continue
        k = s + int(np.count_nonzero(in_track[s:e]))
        if k > s:
            seg, zi = _sig.lfilter(b, a, x[s:k], zi=zi)
            out[s:k] = seg
            held = seg[-1]
            held_at = t[k - 1]
        if k < e:
            if params.blockers_enabled:
                out[k:e] = held
                first_val = held
            else:
                out[k:e] = held * np.exp(-(t[k:e] - held_at) / params.leakage_tau)
                first_val = out[k]
            if k > s:
                hold_times.append(t[k])
                hold_values.append(first_val)
    return out, np.asarray(hold_times), np.asarray(hold_values)


def pga_apply(wave: SampledWaveform, gain: float,
              out_common_mode: float = 0.75) -> SampledWaveform:
    """Ideal programmable gain amplifier: scale the differential signal and
    re-center the common mode for the converter input range."""
    return wave.with_samples(wave.samples * gain, common_mode=out_common_mode)


def interleaved_frontend(wave: SampledWaveform, params: DtleParams,
                         n_channels: int = 4, pga_gain: float = 1.18,
                         pga_common_mode: float = 0.75,
                         clk_phase: float = 0.0) -> SampledWaveform:
    """Demultiplex onto ``n_channels`` staggered DTLE slices and recombine.

    Every slice processes the same input with its clock shifted by
    period/n_channels (plus the common ``clk_phase``, which stands in for the
    receiver's clock alignment to the incoming data); the recombined held
    samples land one per aggregate unit interval.  The result is the
    staircase of held values (one step per UI, after the PGA), time-aligned
    so each step starts at its hold instant.
    """
    period = 1.0 / params.clk_freq
    step = period / n_channels
    slots: dict[int, float] = {}
    for ch in range(n_channels):
        times, held = delivered_samples(wave, params,
                                        clk_phase=clk_phase + ch * step)
        for ti, vi in zip(times, held):
            slots[int(round((ti - wave.t0 - clk_phase) / step))] = vi
    if not slots:
        raise ValueError("waveform too short for one complete DTLE period")
    keys = sorted(slots)
    # keep the contiguous run (the record tail can be ragged across slices)
    last = keys[0]
    for k in keys[1:]:
        if k != last + 1:
            break
        last = k
    keys = [k for k in keys if k <= last]
    # staircase at the original sample rate: each held value occupies one UI
    sps = wave.sample_rate * step   # samples per UI slot
    values = np.array([slots[k] for k in keys])
    counts = [int(round((k + 1) * sps)) - int(round(k * sps)) for k in keys]
    out = np.repeat(values, counts) * pga_gain
    return wave.with_samples(out, common_mode=pga_common_mode,
                             t0=wave.t0 + keys[0] * step + clk_phase)
