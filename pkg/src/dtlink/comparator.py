"""Three-phase charge-steering comparator behavioral model.

One clock period splits into reset (Ts/2), amplification (Ts/4) and
regeneration (Ts/4).  Reset precharges both outputs to the supply and drains
the tail capacitors.  Amplification redistributes charge between the tail
capacitor and the output load, leaving a differential voltage

    V_amp = 2 (Vcm - Vth - dV) / (Vcm - Vth + dV) * (C_tail / C_load) * V_in

sitting just above the low saturation level.  Regeneration enables the
cross-coupled pair, and the separation grows as V_amp * exp(t * gm_eff/C_load)
until one output pins at Vdd and the other parks at v_min_frac * Vdd.  The
reported resolve time follows the distinct-values convention: amplification
time Ts/4 plus the time for the separation to cross Vdd/2,

    t_latch = (C_load / gm_eff) * ln((Vdd/2) / V_amp).

The charge-steering ramp time constant

    dT = (C_tail / K) * (Vcm - Vth - dV) / ((Vcm - Vth) dV)

is exposed for sizing studies.  If a separation can't reach the saturation
span within the regeneration window the decision is metastable and the
outputs report the unresolved trajectory endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

#: decision code for an unresolved comparison
METASTABLE = 0

_AMP_GAIN_TARGET = 2.5   # design-point voltage gain of the amplification phase


def _calibrated_c_load(c_tail: float, vcm: float, vth: float, delta_v: float) -> float:
    """Load capacitance that sets the amplification gain to the design point."""
    a = vcm - vth
    return 2.0 * (a - delta_v) / (a + delta_v) * c_tail / _AMP_GAIN_TARGET


@dataclass(frozen=True)
class ComparatorParams:
    """Charge-steering comparator parameters.

    ``c_load=None`` solves the amplification-gain expression for the load
    capacitance that hits the design-point gain of 2.5; passing an explicit
    value overrides the calibration.
    """

    vdd: float = 1.0
    c_tail: float = 30e-15
    c_load: float | None = None
    vcm: float = 0.75            # input common mode
    vth: float = 0.35            # device threshold
    delta_v: float = 0.05        # residual tail headroom voltage
    k_const: float = 0.02        # transistor constant in the ramp time, A/V^2
    gm_eff: float = 3e-3         # regeneration pair transconductance
    ts: float = 200e-12          # clock period
    offset_sigma: float = 14.4e-3
    v_min_frac: float = 0.40     # low saturation level / vdd
    sensitivity: float = 1e-3    # rated minimum resolvable input
    kickback: float = 1e-3       # reference disturbance per evaluation
    ideal: bool = False          # sign decision with zero delay

    def __post_init__(self):
        if self.c_load is None:
            object.__setattr__(self, "c_load", _calibrated_c_load(
                self.c_tail, self.vcm, self.vth, self.delta_v))
        for name in ("vdd", "c_tail", "c_load", "k_const", "gm_eff", "ts"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.v_min_frac < 1.0:
            raise ValueError("v_min_frac must be in (0, 1)")
        if self.vcm <= self.vth + self.delta_v:
            raise ValueError("vcm must exceed vth + delta_v")
        if self.offset_sigma < 0 or self.kickback < 0:
            raise ValueError("offset_sigma and kickback must be >= 0")

    @property
    def t_reset(self) -> float:
        return self.ts / 2.0

    @property
    def t_amplify(self) -> float:
        return self.ts / 4.0

    @property
    def t_regen(self) -> float:
        return self.ts / 4.0

    def with_(self, **overrides) -> "ComparatorParams":
        return replace(self, **overrides)


@dataclass(frozen=True)
class ComparatorDecision:
    decision: int            # +1, -1, or METASTABLE (0)
    v_out_plus: float
    v_out_minus: float
    t_resolve: float         # inf when metastable

    @property
    def is_metastable(self) -> bool:
        return self.decision == METASTABLE


def delta_t(params: ComparatorParams) -> float:
    """Charge-steering ramp time: how long the tail node takes to climb to
    Vcm - Vth - dV, which is also the load discharge window."""
    a = params.vcm - params.vth
    if a <= params.delta_v:
        raise ValueError("vcm - vth must exceed delta_v")
    return (params.c_tail / params.k_const) * (a - params.delta_v) / (a * params.delta_v)


def amp_gain(params: ComparatorParams) -> float:
    """Small-signal voltage gain of the amplification phase."""
    a = params.vcm - params.vth
    return 2.0 * (a - params.delta_v) / (a + params.delta_v) * params.c_tail / params.c_load


def amp_output(params: ComparatorParams, vin_diff: float) -> float:
    """Differential output at the end of the amplification phase.

    Linear in the input; the model is a small-signal one, stated for inputs
    up to ~100 mV.
    """
    return amp_gain(params) * vin_diff


def regen_delay(params: ComparatorParams, dv_initial: float):
    """(t0, t_latch, t_total) for a given separation entering regeneration.

    t0 is the amplification time Ts/4; t_latch is the time for the
    cross-coupled pair to grow the separation to Vdd/2 (clamped to zero if it
    already starts there or higher).
    """
    if dv_initial <= 0:
        raise ValueError("dv_initial must be positive")
    t0 = params.ts / 4.0
    if dv_initial >= params.vdd / 2.0:
        t_latch = 0.0
    else:
        t_latch = (params.c_load / params.gm_eff) * math.log(
            (params.vdd / 2.0) / dv_initial)
    return t0, t_latch, t0 + t_latch


def _resolve_threshold(params: ComparatorParams) -> float:
    """Smallest amplified separation that still rails within the window."""
    if params.ideal:
        return 0.0
    sep_target = params.vdd * (1.0 - params.v_min_frac)
    tau = params.c_load / params.gm_eff
    return sep_target * math.exp(-params.t_regen / tau)


def evaluate(params: ComparatorParams, vin_diff: float,
             offset: float = 0.0) -> ComparatorDecision:
    """One full reset/amplify/regenerate cycle on a held input.

    The effective input is ``vin_diff + offset``.  An exact tie reports
    metastable rather than flipping a coin, so results are deterministic.
    """
    eff = vin_diff + offset
    vdd = params.vdd
    v_min = params.v_min_frac * vdd
    mid = (vdd + v_min) / 2.0
    sep_target = vdd - v_min
    if params.ideal:
        if eff == 0.0:
            return ComparatorDecision(METASTABLE, mid, mid, math.inf)
        sign = 1 if eff > 0 else -1
        hi, lo = (vdd, v_min)
        return ComparatorDecision(sign, hi if sign > 0 else lo,
                                  lo if sign > 0 else hi, 0.0)
    dv0 = abs(amp_output(params, eff))
    tau = params.c_load / params.gm_eff
    t0 = params.t_amplify
    if dv0 >= _resolve_threshold(params) and dv0 > 0.0:
        sign = 1 if eff > 0 else -1
        if dv0 >= vdd / 2.0:
            t_latch = 0.0
        else:
            t_latch = tau * math.log((vdd / 2.0) / dv0)
        v_p, v_m = (vdd, v_min) if sign > 0 else (v_min, vdd)
        return ComparatorDecision(sign, v_p, v_m, t0 + t_latch)
    # unresolved: report the trajectory endpoints at the window edge
    sep_end = min(dv0 * math.exp(params.t_regen / tau), sep_target)
    sign = 1 if eff > 0 else (-1 if eff < 0 else 0)
    return ComparatorDecision(METASTABLE,
                              mid + sign * sep_end / 2.0,
                              mid - sign * sep_end / 2.0,
                              math.inf)


def decide_array(params: ComparatorParams, vin_eff) -> np.ndarray:
    """Vectorized decision over effective inputs (input plus offset).

    Applies exactly the rules of :func:`evaluate`; returns int8 values in
    {-1, 0, +1} with 0 meaning metastable.
    """
    eff = np.asarray(vin_eff, dtype=float)
    if params.ideal:
        return np.sign(eff).astype(np.int8)
    resolved = (np.abs(eff) * amp_gain(params) >= _resolve_threshold(params))
    resolved &= eff != 0.0
    return np.where(resolved, np.sign(eff), 0.0).astype(np.int8)


@dataclass(frozen=True)
class McOffsetResult:
    sigma_hat: float
    trip_points: np.ndarray
    offsets: np.ndarray

    def to_csv(self, path) -> None:
        """Write ``trial,offset_v,trip_point_v`` rows."""
        with open(path, "w") as fh:
            fh.write("trial,offset_v,trip_point_v\n")
            for i, (o, tp) in enumerate(zip(self.offsets, self.trip_points)):
                fh.write(f"{i},{o:.17g},{tp:.17g}\n")


def _bisect_trips(params: ComparatorParams, offsets: np.ndarray) -> np.ndarray:
    """Trip points for a batch of trial offsets, by decision bisection.

    The decision is metastable in a narrow band around the trip point, so
    both band edges are bisected (decision flips to +1 above the band, to -1
    below) and the trip point is their midpoint.
    """
    offsets = np.asarray(offsets, dtype=float)
    span = np.abs(offsets) + max(0.05, 4.0 * params.offset_sigma)

    def bisect(target: int) -> np.ndarray:
        lo = -span.copy()
        hi = span.copy()
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            d = decide_array(params, mid + offsets)
            if target > 0:
                take_hi = d >= 1          # +1 side: shrink from above
            else:
                take_hi = d > -1          # -1 side: metastable belongs above
            hi = np.where(take_hi, mid, hi)
            lo = np.where(take_hi, lo, mid)
        return 0.5 * (lo + hi)

    return 0.5 * (bisect(+1) + bisect(-1))


def mc_offset_run(params: ComparatorParams, n_trials: int,
                  seed: int) -> McOffsetResult:
    """Monte-Carlo recovery of the input-referred offset spread.

    Each trial draws an offset from N(0, offset_sigma) and locates the input
    trip point by bisecting the comparator decision.  All offsets are drawn
    up front in a single vectorized call, so trial execution order cannot
    change the result.
    """
    if n_trials < 100:
        raise ValueError("n_trials must be >= 100")
    rng = np.random.default_rng(seed)
    offsets = rng.normal(0.0, params.offset_sigma, n_trials)
    trips = _bisect_trips(params, offsets)
    sigma_hat = float(np.std(trips, ddof=1))
    return McOffsetResult(sigma_hat, trips, offsets)
