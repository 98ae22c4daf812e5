"""4-bit flash quantizer: shared reference ladder, 15-comparator banks,
4x time interleaving, and the divider-based clock-phase generator.

The clock generator models the logical pipeline that produces the twelve
clocks: the input clock is divided by two into an in-phase/quadrature pair of
half-rate clocks, and per-channel AND/NAND combinations of the (possibly
inverted) pair carve out the three comparator phases — a 25%-duty
amplification strobe, the reset-half clock, and a 75%-duty clock whose low
quarter is the regeneration window.  Channels are offset by 90 degrees of the
half-rate frame, so the four banks tile time at four samples per frame.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comparator import ComparatorParams, decide_array, evaluate
from .signals import SampledWaveform

RATE_MODE_CHANNELS = {"full": (0, 1, 2, 3), "half": (0, 2), "quarter": (0,)}


@dataclass(frozen=True)
class LadderSpec:
    """Reference ladder: differential tap voltages shared by all banks."""

    full_scale_diff: float = 0.6
    n_bits: int = 4
    tap_voltages: np.ndarray = None
    shared: bool = True

    def __post_init__(self):
        if self.n_bits < 1:
            raise ValueError("n_bits must be >= 1")
        if self.full_scale_diff <= 0:
            raise ValueError("full_scale_diff must be positive")
        taps = self.tap_voltages
        if taps is None:
            taps = _midpoint_taps(self.full_scale_diff, self.n_bits)
        taps = np.asarray(taps, dtype=float)
        if len(taps) != 2 ** self.n_bits - 1:
            raise ValueError("tap count must be 2^n_bits - 1")
        if np.any(np.diff(taps) <= 0):
            raise ValueError("taps must be strictly increasing")
        if not np.allclose(taps, -taps[::-1], atol=1e-12):
            raise ValueError("taps must be symmetric about zero differential")
        object.__setattr__(self, "tap_voltages", taps)

    @property
    def n_taps(self) -> int:
        return len(self.tap_voltages)

    @property
    def lsb(self) -> float:
        return self.full_scale_diff / 2 ** self.n_bits


def _midpoint_taps(full_scale_diff: float, n_bits: int) -> np.ndarray:
    n = 2 ** n_bits
    i = np.arange(n - 1)
    return -full_scale_diff / 2.0 + (i + 1) * full_scale_diff / n


def build_ladder(full_scale_diff: float = 0.6, n_bits: int = 4) -> LadderSpec:
    """Ladder with taps at the code transition midpoints."""
    return LadderSpec(full_scale_diff=full_scale_diff, n_bits=n_bits,
                      tap_voltages=_midpoint_taps(full_scale_diff, n_bits))


@dataclass(frozen=True)
class ThermometerWord:
    """15-bit comparator bank output; bit i set means input above tap i."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=bool))

    @classmethod
    def from_code(cls, code: int, n_taps: int = 15) -> "ThermometerWord":
        return cls(np.arange(n_taps) < code)

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def is_monotone(self) -> bool:
        """No clear bit below a set bit."""
        b = self.bits
        return bool(np.all(b[:-1] >= b[1:]))

    def as_string(self) -> str:
        """MSB-first bit string (top tap printed first)."""
        return "".join("1" if b else "0" for b in self.bits[::-1])


# ---------------------------------------------------------------------------
# clock phase generation
# ---------------------------------------------------------------------------

# Interval algebra runs in integer quarter-frame units (the frame is 0..4),
# so duty ratios come out as exact rationals, free of float modulo noise.

def _intersect(a, b):
    out = []
    for s1, e1 in a:
        for s2, e2 in b:
            s, e = max(s1, s2), min(e1, e2)
            if e > s:
                out.append((s, e))
    return sorted(out)


def _complement(ivs, period=4):
    out = []
    t = 0
    for s, e in sorted(ivs):
        if s > t:
            out.append((t, s))
        t = max(t, e)
    if t < period:
        out.append((t, period))
    return out


def _rotate(ivs, shift, period=4):
    out = []
    for s, e in ivs:
        length = e - s
        s2 = (s + shift) % period
        e2 = s2 + length
        if e2 <= period:
            out.append((s2, e2))
        else:
            out.append((s2, period))
            out.append((0, e2 - period))
    return sorted(out)


@dataclass(frozen=True)
class ChannelClocks:
    """The three clocks of one channel, as high intervals within one frame.

    Intervals are stored in quarter-frame units (0..4); :meth:`intervals_s`
    converts to seconds.
    """

    phase_quarters: int
    quarter: float        # frame_period / 4, s
    clk1: tuple           # 25% duty: high during amplification
    clk2: tuple           # high during the reset half
    clk3: tuple           # 75% duty: low during regeneration

    def intervals_s(self, name: str) -> tuple:
        return tuple((s * self.quarter, e * self.quarter)
                     for s, e in getattr(self, name))

    def high_fraction(self, name: str) -> float:
        return sum(e - s for s, e in getattr(self, name)) / 4.0

    def clk1_rising(self) -> float:
        """Sampling instant of this channel within the frame, s."""
        return self.clk1[0][0] * self.quarter


@dataclass(frozen=True)
class ClockPhaseSchedule:
    input_clk: float
    frame_period: float
    channels: tuple

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def sample_spacing(self) -> float:
        return self.frame_period / self.n_channels

    def sampling_instants(self, channel: int, n_frames: int,
                          t0: float = 0.0) -> np.ndarray:
        base = t0 + self.channels[channel].clk1_rising()
        return base + self.frame_period * np.arange(n_frames)


def gen_clock_phases(input_clk: float = 10e9) -> ClockPhaseSchedule:
    """Derive the per-channel clock edges from the divided input clock.

    Divide-by-two yields in-phase/quadrature half-rate clocks I and Q; the
    channel-0 clocks are CLK1 = AND(~I, Q), CLK2 = I, CLK3 = NAND(~I, ~Q),
    and channels 1..3 use the same logic with the pair rotated by successive
    quarter frames.
    """
    if input_clk <= 0:
        raise ValueError("input_clk must be positive")
    frame = 2.0 / input_clk
    i_high = [(0, 2)]
    q_high = [(1, 3)]
    channels = []
    for ch in range(4):
        i_ch = _rotate(i_high, ch)
        q_ch = _rotate(q_high, ch)
        not_i = _complement(i_ch)
        not_q = _complement(q_ch)
        clk1 = _intersect(not_i, q_ch)
        clk3 = _complement(_intersect(not_i, not_q))
        channels.append(ChannelClocks(phase_quarters=ch, quarter=frame / 4.0,
                                      clk1=tuple(clk1), clk2=tuple(i_ch),
                                      clk3=tuple(clk3)))
    return ClockPhaseSchedule(input_clk=input_clk, frame_period=frame,
                              channels=tuple(channels))


# ---------------------------------------------------------------------------
# conversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdcConfig:
    ladder: LadderSpec = field(default_factory=build_ladder)
    comparator: ComparatorParams = field(default_factory=ComparatorParams)
    schedule: ClockPhaseSchedule = field(default_factory=gen_clock_phases)
    offsets: np.ndarray | None = None        # (n_channels, n_taps), frozen mismatch
    bubble_policy: str = "majority"
    rate_mode: str = "full"
    active_channels: tuple | None = None     # explicit override of rate_mode

    def __post_init__(self):
        if self.bubble_policy not in ("majority", "first-zero"):
            raise ValueError("bubble_policy must be 'majority' or 'first-zero'")
        if self.rate_mode not in RATE_MODE_CHANNELS:
            raise ValueError(f"rate_mode must be one of {sorted(RATE_MODE_CHANNELS)}")
        if self.offsets is not None:
            offs = np.asarray(self.offsets, dtype=float)
            want = (self.schedule.n_channels, self.ladder.n_taps)
            if offs.shape != want:
                raise ValueError(f"offsets must have shape {want}, got {offs.shape}")
            object.__setattr__(self, "offsets", offs)

    def channels_in_use(self) -> tuple:
        if self.active_channels is not None:
            return tuple(self.active_channels)
        return RATE_MODE_CHANNELS[self.rate_mode]

    def offsets_for(self, channel: int) -> np.ndarray:
        if self.offsets is None:
            return np.zeros(self.ladder.n_taps)
        return self.offsets[channel]


def draw_offsets(sigma: float, seed: int, n_channels: int = 4,
                 n_taps: int = 15) -> np.ndarray:
    """Frozen per-comparator mismatch, drawn once at configuration time."""
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, sigma, (n_channels, n_taps))


def encode_thermometer(sample: float, ladder: LadderSpec,
                       comp: ComparatorParams, offsets) -> ThermometerWord:
    """One bank evaluation: bit i set when the comparator on tap i trips high.

    Each evaluation disturbs its reference tap by the configured kick-back
    amplitude; metastable decisions encode as 0.  The raw word may contain
    bubbles when offsets are nonzero.
    """
    offsets = np.asarray(offsets, dtype=float)
    if offsets.shape != (ladder.n_taps,):
        raise ValueError("offsets length must equal the tap count")
    taps_eff = ladder.tap_voltages + comp.kickback
    bits = np.array([evaluate(comp, sample - tap, off).decision == 1
                     for tap, off in zip(taps_eff, offsets)])
    return ThermometerWord(bits)


def _majority_smooth(bits: np.ndarray) -> np.ndarray:
    """Majority-of-3 with a set bit implied below tap 0 and a clear bit above
    the top tap."""
    padded = np.concatenate([[True], bits, [False]])
    trip = (padded[:-2].astype(int) + padded[1:-1].astype(int)
            + padded[2:].astype(int))
    return trip >= 2


def thermometer_to_binary(word: ThermometerWord, policy: str = "majority") -> int:
    """Collapse a (possibly bubbled) thermometer word to a binary code.

    majority: count set bits after majority-of-3 smoothing.
    first-zero: index of the first clear bit from the bottom.
    Monotone words map to their set-bit count under both policies.
    """
    bits = word.bits
    if policy == "majority":
        return int(np.count_nonzero(_majority_smooth(bits)))
    if policy == "first-zero":
        clear = np.flatnonzero(~bits)
        return int(clear[0]) if clear.size else len(bits)
    raise ValueError("policy must be 'majority' or 'first-zero'")


@dataclass(frozen=True)
class ConversionResult:
    """Sorted interleaved conversion output plus bookkeeping counters."""

    t: np.ndarray
    channel: np.ndarray
    codes: np.ndarray
    thermo: np.ndarray            # (n, n_taps) bool, bubble-corrected words
    metastable_count: int

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for i in range(len(self.t)):
            yield (self.t[i], int(self.codes[i]), int(self.channel[i]),
                   ThermometerWord(self.thermo[i]))

    def to_csv(self, path) -> None:
        """Write ``t_s,channel,code,thermo_bits`` rows (thermo MSB first)."""
        with open(path, "w") as fh:
            fh.write("t_s,channel,code,thermo_bits\n")
            for i in range(len(self.t)):
                bits = "".join("1" if b else "0" for b in self.thermo[i][::-1])
                fh.write(f"{self.t[i]:.17g},{self.channel[i]},{self.codes[i]},{bits}\n")


def _sample_at(wave: SampledWaveform, instants: np.ndarray) -> np.ndarray:
    """Waveform values at the scheduled instants (exact grid hit or linear
    interpolation)."""
    pos = (instants - wave.t0) * wave.sample_rate
    if np.any(pos < -1e-6) or np.any(pos > len(wave) - 1 + 1e-6):
        raise ValueError("waveform shorter than the conversion schedule")
    near = np.round(pos)
    on_grid = np.abs(pos - near) < 1e-6
    idx = np.clip(near.astype(np.int64), 0, len(wave) - 1)
    vals = wave.samples[idx]
    if not np.all(on_grid):
        interp = np.interp(pos, np.arange(len(wave)), wave.samples)
        vals = np.where(on_grid, vals, interp)
    return vals


def adc_convert(wave: SampledWaveform, cfg: AdcConfig,
                n_frames: int | None = None) -> ConversionResult:
    """Convert a waveform with the interleaved banks.

    Each active channel samples at its amplification-strobe rising edges; the
    per-sample thermometer word is collapsed to binary under the configured
    bubble policy and the interleaved stream is returned in time order.
    Inactive channels (half/quarter rate) simply do not sample.
    """
    sched = cfg.schedule
    auto_frames = n_frames is None
    if auto_frames:
        first = min(sched.channels[c].clk1_rising() for c in cfg.channels_in_use())
        n_frames = int((wave.duration - first - 1.0 / wave.sample_rate)
                       // sched.frame_period) + 1
        n_frames = max(n_frames, 0)
    if n_frames <= 0:
        raise ValueError("waveform shorter than the conversion schedule")
    taps_eff = cfg.ladder.tap_voltages + cfg.comparator.kickback
    t_last = wave.t0 + (len(wave) - 1) / wave.sample_rate
    all_t, all_ch, all_codes, all_words = [], [], [], []
    metastable = 0
    for ch in cfg.channels_in_use():
        instants = sched.sampling_instants(ch, n_frames, t0=wave.t0)
        if auto_frames:
            instants = instants[instants <= t_last + 1e-15]
        vals = _sample_at(wave, instants)
        eff = vals[:, None] - taps_eff[None, :] + cfg.offsets_for(ch)[None, :]
        decisions = decide_array(cfg.comparator, eff)
        metastable += int(np.count_nonzero(decisions == 0))
        raw = decisions == 1
        codes = _codes_from_words(raw, cfg.bubble_policy)
        all_t.append(instants)
        all_ch.append(np.full(len(instants), ch, dtype=np.int8))
        all_codes.append(codes)
        all_words.append(np.arange(cfg.ladder.n_taps)[None, :] < codes[:, None])
    t = np.concatenate(all_t)
    order = np.argsort(t, kind="stable")
    return ConversionResult(
        t=t[order],
        channel=np.concatenate(all_ch)[order],
        codes=np.concatenate(all_codes)[order],
        thermo=np.concatenate(all_words)[order],
        metastable_count=metastable,
    )


def _codes_from_words(raw: np.ndarray, policy: str) -> np.ndarray:
    """Vectorized bubble policy over an (n_samples, n_taps) bool array."""
    if policy == "majority":
        n = raw.shape[1]
        padded = np.concatenate(
            [np.ones((len(raw), 1), bool), raw, np.zeros((len(raw), 1), bool)], axis=1)
        trip = (padded[:, :-2].astype(np.int8) + padded[:, 1:-1].astype(np.int8)
                + padded[:, 2:].astype(np.int8))
        return np.count_nonzero(trip >= 2, axis=1).astype(np.int16)
    # first-zero
    any_clear = ~raw.all(axis=1)
    first = np.argmin(raw, axis=1)          # index of first False
    return np.where(any_clear, first, raw.shape[1]).astype(np.int16)
