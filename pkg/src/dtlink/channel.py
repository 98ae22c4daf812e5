"""Lossy FR4-style channel: lumped RLGC line plus skin/dielectric loss.

The line is a cascade of identical lumped L-sections (series R, L then shunt
G, C), one group per inch, each inch subdivided ``subsections`` times so the
lumped approximation stays valid well past 10 GHz.  On top of the line sits a
per-inch attenuation factor ``skin_loss_coeff * sqrt(f) + dielectric_loss_coeff * f``
in dB, applied as pure (zero-phase) attenuation; all delay and dispersion come
from the reactive line itself.

``calibrate_to_loss`` scales the two loss coefficients by one scalar until the
end-to-end response hits a target loss at a target frequency, which is how the
default channel is pinned to its single published loss number.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .signals import SampledWaveform


class CalibrationError(RuntimeError):
    """Loss target unreachable by scaling the loss coefficients."""


@dataclass(frozen=True)
class ChannelSpec:
    """Per-inch RLGC values plus frequency-dependent loss coefficients."""

    n_segments: int = 12            # inches of trace
    r: float = 0.3                  # series resistance per inch, ohm
    l: float = 7.5e-9               # series inductance per inch, H
    c: float = 3.0e-12              # shunt capacitance per inch, F
    g: float = 0.0                  # shunt conductance per inch, S
    skin_loss_coeff: float = 8e-6   # dB / sqrt(Hz) / inch
    dielectric_loss_coeff: float = 2e-11  # dB / Hz / inch
    subsections: int = 40           # lumped subdivisions per inch
    z0: float = 50.0                # source/load termination, ohm

    def __post_init__(self):
        if self.n_segments < 1:
            raise ValueError("n_segments must be >= 1")
        if self.subsections < 1:
            raise ValueError("subsections must be >= 1")
        for name in ("r", "l", "c", "g", "skin_loss_coeff", "dielectric_loss_coeff"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.z0 <= 0:
            raise ValueError("z0 must be positive")


def _line_s21(spec: ChannelSpec, freqs: np.ndarray) -> np.ndarray:
    """S21 of the doubly terminated lumped cascade.

    The cascade is the n-th power of one subsection's ABCD matrix.  With
    det = 1 the power has the closed form M^n = U_{n-1}(tau) M - U_{n-2}(tau) I
    (Chebyshev second kind, tau = (A+D)/2), which rearranges to an expression
    in exp(-n*gamma) that cannot overflow however deep the cutoff.
    """
    w = 2.0 * np.pi * freqs
    k = spec.subsections
    n = spec.n_segments * k
    z = (spec.r + 1j * w * spec.l) / k
    y = (spec.g + 1j * w * spec.c) / k
    tau = 1.0 + z * y / 2.0
    root = np.sqrt(tau * tau - 1.0)
    lam = np.where(np.abs(tau + root) >= 1.0, tau + root, tau - root)
    gam = np.log(lam)
    eg = np.exp(-gam)
    eng = np.exp(-n * gam)
    sinh_g = (1.0 / eg - eg) / 2.0
    match = tau + (z / spec.z0 + y * spec.z0) / 2.0
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        s21 = 2.0 * sinh_g * eng / ((1.0 - eng * eng) * match - (eg - eng * eng / eg))
    # gamma -> 0 (DC or a lossless section at low f): take the limit directly
    small = np.abs(gam) < 1e-8
    if np.any(small):
        limit = 2.0 / (2.0 + n * (z / spec.z0 + y * spec.z0))
        s21 = np.where(small, limit, s21)
    return np.where(np.isfinite(s21), s21, 0.0)


def _loss_factor(spec: ChannelSpec, freqs: np.ndarray) -> np.ndarray:
    f = np.maximum(freqs, 0.0)
    db_per_inch = spec.skin_loss_coeff * np.sqrt(f) + spec.dielectric_loss_coeff * f
    return 10.0 ** (-db_per_inch * spec.n_segments / 20.0)


def channel_response(spec: ChannelSpec, freqs) -> np.ndarray:
    """Complex end-to-end gain at the given frequencies (Hz, >= 0)."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if np.any(freqs < 0):
        raise ValueError("frequencies must be >= 0")
    return _line_s21(spec, freqs) * _loss_factor(spec, freqs)


def calibrate_to_loss(spec: ChannelSpec, target_loss_db: float,
                      at_freq: float) -> ChannelSpec:
    """Scale both loss coefficients so |H(at_freq)| = -target_loss_db.

    Bisection on a single scalar multiplier; converges to within 0.01 dB or
    raises :class:`CalibrationError`.  A near-zero scalar is a valid result
    when the unscaled line already sits at the target.
    """
    if target_loss_db <= 0:
        raise ValueError("target_loss_db must be positive")

    def loss_db(scale: float) -> float:
        scaled = replace(spec,
                         skin_loss_coeff=spec.skin_loss_coeff * scale,
                         dielectric_loss_coeff=spec.dielectric_loss_coeff * scale)
        h = abs(channel_response(scaled, [at_freq])[0])
        return -20.0 * np.log10(max(h, 1e-300))

    lo, hi = 0.0, 1.0
    for _ in range(80):
        if loss_db(hi) >= target_loss_db:
            break
        hi *= 2.0
    else:
        # Scaling cannot raise the loss (e.g. zero coefficients).  Accept a
        # zero scalar when the bare line already sits at the target.
        if abs(loss_db(0.0) - target_loss_db) <= 0.01:
            return replace(spec, skin_loss_coeff=0.0, dielectric_loss_coeff=0.0)
        raise CalibrationError(
            f"loss target {target_loss_db} dB at {at_freq:g} Hz unreachable "
            "(coefficients scale out of range)")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if loss_db(mid) < target_loss_db:
            lo = mid
        else:
            hi = mid
    scale = 0.5 * (lo + hi)
    if abs(loss_db(scale) - target_loss_db) > 0.01:
        raise CalibrationError(
            f"loss target {target_loss_db} dB at {at_freq:g} Hz not met within "
            "0.01 dB after 60 bisection steps")
    return replace(spec,
                   skin_loss_coeff=spec.skin_loss_coeff * scale,
                   dielectric_loss_coeff=spec.dielectric_loss_coeff * scale)


def _minimum_phase(mag: np.ndarray) -> np.ndarray:
    """Minimum-phase spectrum with the given one-sided magnitude.

    Real-cepstrum construction on the rfft grid (length nfft//2 + 1).  Skin
    and dielectric loss are physically minimum-phase, and the associated
    dispersion matters: it skews the intersymbol interference toward
    postcursors, which is what a causal peaking equalizer can fight.
    """
    nfft = 2 * (len(mag) - 1)
    log_mag = np.log(np.maximum(mag, 1e-300))
    full = np.concatenate([log_mag, log_mag[-2:0:-1]])
    cepstrum = np.fft.ifft(full).real
    fold = np.zeros(nfft)
    fold[0] = 1.0
    fold[nfft // 2] = 1.0
    fold[1:nfft // 2] = 2.0
    return np.exp(np.fft.fft(cepstrum * fold))[: nfft // 2 + 1]


def apply_channel(wave: SampledWaveform, spec: ChannelSpec,
                  circular: bool = False) -> SampledWaveform:
    """Filter a waveform through the channel in the frequency domain.

    FFT, multiply by the channel response on the FFT bin grid, inverse FFT.
    The attenuation factor is applied with its minimum-phase completion (the
    line's own reactive phase is already part of its two-port response), so
    |H| matches :func:`channel_response` exactly while the time response is
    causal.  By default the record is zero-padded by at least one record
    length plus the nominal line delay to suppress wraparound;
    ``circular=True`` skips the padding and applies the exact circular
    convolution, which is what shift-invariance checks want.  Output length
    equals input length.
    """
    n = len(wave)
    if n == 0:
        raise ValueError("cannot filter an empty waveform")
    if circular:
        if n % 2:
            raise ValueError("circular filtering needs an even record length")
        npad = n
    else:
        delay = spec.n_segments * np.sqrt(spec.l * spec.c)
        support = int(np.ceil(4.0 * delay * wave.sample_rate))
        npad = 1 << int(np.ceil(np.log2(2 * n + support)))
    spectrum = np.fft.rfft(wave.samples, npad)
    grid = np.fft.rfftfreq(npad, 1.0 / wave.sample_rate)
    h = _line_s21(spec, grid) * _minimum_phase(_loss_factor(spec, grid))
    out = np.fft.irfft(spectrum * h, npad)[:n]
    return wave.with_samples(out)
