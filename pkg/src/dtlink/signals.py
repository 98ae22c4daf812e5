"""Deterministic signal sources and the sampled-waveform container.

Everything downstream (channel, equalizer, ADC, metrics) passes differential
voltages around as ``SampledWaveform``.  Generators are pure functions of
their arguments: same inputs, bit-identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Standard maximal-length polynomials, x^n + x^k + 1, given as (n, k).
PRBS_TAPS = {
    7: (7, 6),
    9: (9, 5),
    15: (15, 14),
    23: (23, 18),
    31: (31, 28),
}


@dataclass(frozen=True)
class BitStream:
    """A binary sequence with its line rate."""

    bits: np.ndarray
    bit_rate: float

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int8)
        if bits.size and not np.all((bits == 0) | (bits == 1)):
            raise ValueError("bits must contain only 0 and 1")
        if self.bit_rate <= 0:
            raise ValueError("bit_rate must be positive")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)


@dataclass(frozen=True)
class SampledWaveform:
    """Uniformly sampled differential voltage sequence.

    ``samples`` holds the differential value; the single-ended legs are
    ``common_mode +/- sample/2`` and can be recovered with :meth:`legs`.
    """

    samples: np.ndarray
    sample_rate: float
    common_mode: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.sample_rate

    def legs(self) -> tuple[np.ndarray, np.ndarray]:
        """Single-ended (positive, negative) legs."""
        half = self.samples / 2.0
        return self.common_mode + half, self.common_mode - half

    def with_samples(self, samples: np.ndarray, **overrides) -> "SampledWaveform":
        kw = dict(sample_rate=self.sample_rate, common_mode=self.common_mode,
                  t0=self.t0)
        kw.update(overrides)
        return SampledWaveform(samples, **kw)

    def to_csv(self, path) -> None:
        """Write ``t_s,v_diff,v_cm`` rows at full double precision."""
        t = self.times()
        with open(path, "w") as fh:
            fh.write("t_s,v_diff,v_cm\n")
            for ti, vi in zip(t, self.samples):
                fh.write(f"{ti:.17g},{vi:.17g},{self.common_mode:.17g}\n")


def gen_prbs(order: int, seed: int, n_bits: int, bit_rate: float = 20e9) -> BitStream:
    """Maximal-length LFSR pseudo-random bit sequence.

    Fibonacci LFSR with the standard x^n + x^k + 1 polynomial for the chosen
    order; the emitted bit is the register LSB.  A zero seed is the LFSR
    lock-up state and is rejected.
    """
    if order not in PRBS_TAPS:
        raise ValueError(f"order must be one of {sorted(PRBS_TAPS)}, got {order}")
    if n_bits < 0:
        raise ValueError("n_bits must be >= 0")
    mask = (1 << order) - 1
    state = seed & mask
    if state == 0:
        raise ValueError("seed must be nonzero in the low `order` bits (LFSR lock-up)")
    _, k = PRBS_TAPS[order]
    # right-shift register emitting the LSB; the x^n + x^k + 1 recurrence
    # y[m] = y[m-n] ^ y[m-n+k] needs feedback from bits k and 0
    out = np.empty(n_bits, dtype=np.int8)
    for i in range(n_bits):
        out[i] = state & 1
        fb = ((state >> k) ^ state) & 1
        state = (state >> 1) | (fb << (order - 1))
    return BitStream(out, bit_rate)


def nrz_waveform(bits: BitStream, samples_per_bit: int = 16, swing: float = 1.0,
                 common_mode: float = 0.6, rise_time: float = 0.0) -> SampledWaveform:
    """Differential NRZ waveform with linear-ramp edges.

    Bit 1 maps to +swing/2 differential, bit 0 to -swing/2.  Each edge ramps
    linearly from the previous level starting at the bit boundary and lasting
    ``rise_time``; the midpoint of an edge therefore sits at the level average.
    """
    if samples_per_bit < 4:
        raise ValueError("samples_per_bit must be >= 4")
    bit_period = 1.0 / bits.bit_rate
    if rise_time < 0 or rise_time >= bit_period:
        raise ValueError("rise_time must satisfy 0 <= rise_time < bit period")
    levels = np.where(bits.bits > 0, swing / 2.0, -swing / 2.0)
    out = np.repeat(levels, samples_per_bit)
    sample_rate = bits.bit_rate * samples_per_bit
    if rise_time > 0.0:
        n_ramp = int(np.ceil(rise_time * sample_rate))
        k = np.arange(n_ramp)
        frac = np.minimum(k / (rise_time * sample_rate), 1.0)
        for i in np.flatnonzero(np.diff(levels)) + 1:
            a, b = levels[i - 1], levels[i]
            out[i * samples_per_bit + k] = a + (b - a) * frac
    return SampledWaveform(out, sample_rate, common_mode=common_mode)


def gen_sine(freq: float, amplitude_diff: float, common_mode: float,
             sample_rate: float, n_samples: int) -> SampledWaveform:
    """Differential sine: samples[k] = (amplitude_diff/2) sin(2 pi f k / fs).

    ``amplitude_diff`` is the peak-to-peak differential swing, so the
    differential samples span +/- amplitude_diff/2.
    """
    if freq >= sample_rate / 2.0:
        raise ValueError("freq must be below sample_rate/2")
    k = np.arange(n_samples)
    samples = (amplitude_diff / 2.0) * np.sin(2.0 * np.pi * freq * k / sample_rate)
    return SampledWaveform(samples, sample_rate, common_mode=common_mode)
