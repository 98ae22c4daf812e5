"""Scenario runner: one command per experiment family.

    link-sim        data source -> channel -> equalizer slices -> converter
    adc-char        sine -> converter -> SNDR/SFDR/ENOB + DNL/INL
    comparator-mc   Monte-Carlo offset recovery
    dtle-bode       equalizer pole/zero/gain sweep
    channel-sweep   calibrated channel loss vs frequency

Every run writes its artifacts plus a manifest recording the configuration
hash, master seed, tool version and a content hash of each emitted file.
Reruns with the same configuration and seed are byte-identical, including
with ``--parallel``.

Exit codes: 0 ok, 2 configuration error, 3 calibration failure, 4 check
failure (with ``--check``).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import CalibrationError, apply_channel, calibrate_to_loss, channel_response
from .comparator import McOffsetResult, _bisect_trips, mc_offset_run
from .config import (ConfigError, ScenarioConfig, apply_overrides,
                     load_scenario)
from .dtle import (dtle_frequency_response, dtle_gains, dtle_poles_zero,
                   interleaved_frontend)
from .flash_adc import (AdcConfig, ConversionResult, adc_convert, build_ladder,
                        draw_offsets, gen_clock_phases)
from .metrics import (MetricsReport, best_phase_opening, dnl_inl, enob_from_sndr,
                      eye_diagram, nearest_coherent_bin, power_fom,
                      spectral_metrics)
from .reference_data import DTLE_POWER_W, N_DTLE, POWER_BREAKDOWN_W
from .signals import gen_prbs, gen_sine, nrz_waveform

COMMANDS = ("link-sim", "adc-char", "comparator-mc", "dtle-bode", "channel-sweep")

ENV_OUT_DIR = "DTLINK_OUT"


class CheckFailure(RuntimeError):
    """A --check assertion did not hold."""


@dataclass
class RunResult:
    status: int
    out_dir: Path
    files: dict
    summary: str


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_manifest(out: Path, cfg: ScenarioConfig, command: str,
                    files: list[Path]) -> Path:
    manifest = {
        "tool": "dtlink",
        "version": __version__,
        "command": command,
        "config_hash": cfg.content_hash(),
        "master_seed": cfg.master_seed,
        "files": {p.name: _sha256(p) for p in files},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _adc_config(cfg: ScenarioConfig, ideal: bool | None = None) -> AdcConfig:
    adc = cfg.adc
    use_ideal = adc.ideal_comparators if ideal is None else ideal
    comp = cfg.comparator.with_(ideal=use_ideal,
                                kickback=0.0 if use_ideal else adc.kickback)
    offsets = None
    if adc.offset_sigma > 0.0:
        offsets = draw_offsets(adc.offset_sigma, cfg.seed_for("adc-offsets"))
    return AdcConfig(
        ladder=build_ladder(adc.full_scale_diff, adc.n_bits),
        comparator=comp,
        schedule=gen_clock_phases(cfg.clocks.input_clk),
        offsets=offsets,
        bubble_policy=adc.bubble_policy,
        rate_mode=adc.rate_mode,
    )


def _convert(wave, adc_cfg: AdcConfig, parallel: int) -> ConversionResult:
    channels = adc_cfg.channels_in_use()
    if parallel <= 1 or len(channels) <= 1:
        return adc_convert(wave, adc_cfg)
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        parts = list(pool.map(
            lambda ch: adc_convert(wave, replace(adc_cfg, active_channels=(ch,))),
            channels))
    t = np.concatenate([p.t for p in parts])
    order = np.argsort(t, kind="stable")
    return ConversionResult(
        t=t[order],
        channel=np.concatenate([p.channel for p in parts])[order],
        codes=np.concatenate([p.codes for p in parts])[order],
        thermo=np.concatenate([p.thermo for p in parts])[order],
        metastable_count=sum(p.metastable_count for p in parts),
    )


def _mc_run(cfg: ScenarioConfig) -> McOffsetResult:
    if cfg.parallel <= 1:
        return mc_offset_run(cfg.comparator, cfg.mc_trials,
                             cfg.seed_for("comparator-mc"))
    rng = np.random.default_rng(cfg.seed_for("comparator-mc"))
    offsets = rng.normal(0.0, cfg.comparator.offset_sigma, cfg.mc_trials)
    chunks = np.array_split(offsets, cfg.parallel)
    with ThreadPoolExecutor(max_workers=cfg.parallel) as pool:
        trips = np.concatenate(list(pool.map(
            lambda c: _bisect_trips(cfg.comparator, c), chunks)))
    return McOffsetResult(float(np.std(trips, ddof=1)), trips, offsets)


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise CheckFailure(message)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_link_sim(cfg: ScenarioConfig, out: Path, check: bool) -> tuple[list[Path], str]:
    from .plots import plot_eye

    src = cfg.source
    ui = 1.0 / src.bit_rate
    bits = gen_prbs(src.prbs_order, src.prbs_seed, src.n_bits, src.bit_rate)
    tx = nrz_waveform(bits, src.samples_per_bit, src.swing, src.common_mode,
                      src.rise_time)
    spec = calibrate_to_loss(cfg.channel.spec, cfg.channel.target_loss_db,
                             cfg.channel.loss_at_hz)
    rx = apply_channel(tx, spec)
    skip = cfg.metrics.eye_skip_ui
    rx_open, rx_phase = best_phase_opening(rx, ui, cfg.metrics.eye_phases, skip)
    rx_eye = eye_diagram(rx, ui, phase_offset=rx_phase, skip_ui=skip)

    eq = interleaved_frontend(rx, cfg.dtle, pga_gain=cfg.pga.gain,
                              pga_common_mode=cfg.pga.out_common_mode,
                              clk_phase=cfg.clocks.rx_phase_offset)
    eq_eye = eye_diagram(eq, ui, phase_offset=0.0, skip_ui=skip)

    conv = _convert(eq, _adc_config(cfg), cfg.parallel)

    files = []
    rx_path, eq_path = out / "rx_eye.svg", out / "eq_eye.svg"
    plot_eye(rx_eye, rx_path, title="receiver input eye")
    plot_eye(eq_eye, eq_path, title="equalized (held) eye")
    codes_path = out / "adc_codes.csv"
    conv.to_csv(codes_path)
    files += [rx_path, eq_path, codes_path]

    summary = "\n".join([
        "link simulation",
        "---------------",
        f"bits               : {src.n_bits} (order-{src.prbs_order} pattern)",
        f"channel            : {cfg.channel.target_loss_db:.2f} dB at "
        f"{cfg.channel.loss_at_hz/1e9:.2f} GHz",
        f"rx eye opening     : {rx_open*1e3:.3f} mV (best of "
        f"{cfg.metrics.eye_phases} phases)",
        f"equalized opening  : {eq_eye.vertical_opening*1e3:.3f} mV",
        f"conversions        : {len(conv)}",
        f"metastable events  : {conv.metastable_count}",
    ]) + "\n"
    if check:
        _check(rx_open < 10e-3,
               f"receiver eye should be closed (<10 mV), got {rx_open*1e3:.2f} mV")
        _check(eq_eye.vertical_opening >= 80e-3,
               "equalized eye should open to >=80 mV, got "
               f"{eq_eye.vertical_opening*1e3:.2f} mV")
    return files, summary


def _cmd_adc_char(cfg: ScenarioConfig, out: Path, check: bool) -> tuple[list[Path], str]:
    from .plots import plot_dnl_inl, plot_spectrum

    met = cfg.metrics
    sched = gen_clock_phases(cfg.clocks.input_clk)
    fs = sched.n_channels / sched.frame_period
    m, fin = nearest_coherent_bin(fs, met.n_fft, met.fin_target)
    adc_cfg = _adc_config(cfg)

    tone = gen_sine(fin, cfg.source.sine_amplitude_diff,
                    cfg.source.sine_common_mode, fs, met.n_fft)
    conv = _convert(tone, adc_cfg, cfg.parallel)
    spec = spectral_metrics(conv.codes[:met.n_fft], fs, fin, met.n_fft)

    m_dnl, fin_dnl = nearest_coherent_bin(fs, met.n_dnl_samples, 0.997e9)
    fsr = cfg.adc.full_scale_diff
    dnl_tone = gen_sine(fin_dnl, fsr * 1.04, cfg.source.sine_common_mode, fs,
                        met.n_dnl_samples)
    dnl_conv = _convert(dnl_tone, adc_cfg, cfg.parallel)
    dnl, inl = dnl_inl(dnl_conv.codes, cfg.adc.n_bits)

    ledger = dict(POWER_BREAKDOWN_W)
    front_end = {"equalizer_slices": N_DTLE * DTLE_POWER_W}
    pw = power_fom(ledger, fs, spec.enob, bit_rate=cfg.source.bit_rate,
                   front_end=front_end)
    report = MetricsReport(sndr_db=spec.sndr_db, sfdr_db=spec.sfdr_db,
                           enob=spec.enob, dnl=dnl, inl=inl, fomw=pw.fomw,
                           power_total=pw.power_total,
                           energy_per_bit=pw.energy_per_bit)

    files = []
    spec_csv, spec_svg = out / "spectrum.csv", out / "spectrum.svg"
    spec.to_csv(spec_csv)
    plot_spectrum(spec.freqs, spec.power_dbc, spec_svg,
                  title=f"output spectrum, {fin/1e9:.3f} GHz tone")
    lin_svg = out / "dnl_inl.svg"
    plot_dnl_inl(dnl, inl, lin_svg)
    rep_csv = out / "metrics.csv"
    report.to_csv(rep_csv)
    files += [spec_csv, spec_svg, lin_svg, rep_csv]

    summary = "\n".join([
        f"converter characterization at {fin/1e9:.4f} GHz "
        f"(bin {m} of {met.n_fft}, {fs/1e9:.0f} GS/s)",
        "",
        report.to_text(),
        f"metastable events  : {conv.metastable_count + dnl_conv.metastable_count}",
    ]) + "\n"
    if check:
        if cfg.adc.offset_sigma == 0.0 and cfg.adc.ideal_comparators:
            _check(abs(spec.sndr_db - 25.84) <= 0.3,
                   f"ideal-quantizer SNDR 25.84 +/- 0.3 dB, got {spec.sndr_db:.2f}")
            _check(abs(spec.enob - 4.0) <= 0.05,
                   f"ideal-quantizer ENOB 4.0 +/- 0.05, got {spec.enob:.3f}")
        else:
            ideal_conv = _convert(tone, _adc_config(
                replace(cfg, adc=replace(cfg.adc, offset_sigma=0.0,
                                         ideal_comparators=True))), cfg.parallel)
            ideal = spectral_metrics(ideal_conv.codes[:met.n_fft], fs, fin, met.n_fft)
            _check(spec.enob <= ideal.enob - 0.15,
                   f"offsets should cost >=0.15 bits (ideal {ideal.enob:.3f}, "
                   f"got {spec.enob:.3f})")
            _check(spec.enob >= 3.3,
                   f"ENOB should stay >=3.3 bits, got {spec.enob:.3f}")
    return files, summary


def _cmd_comparator_mc(cfg: ScenarioConfig, out: Path, check: bool) -> tuple[list[Path], str]:
    from .plots import plot_offset_histogram

    result = _mc_run(cfg)
    files = []
    csv_path = out / "mc_offsets.csv"
    result.to_csv(csv_path)
    hist_path = out / "mc_hist.svg"
    plot_offset_histogram(result.trip_points, result.sigma_hat, hist_path)
    files += [csv_path, hist_path]
    sigma_cfg = cfg.comparator.offset_sigma
    summary = "\n".join([
        "comparator offset Monte-Carlo",
        "-----------------------------",
        f"trials            : {cfg.mc_trials}",
        f"configured sigma  : {sigma_cfg*1e3:.3f} mV",
        f"recovered sigma   : {result.sigma_hat*1e3:.3f} mV",
        f"trip point mean   : {np.mean(result.trip_points)*1e6:.3f} uV",
    ]) + "\n"
    if check:
        _check(abs(result.sigma_hat - sigma_cfg) <= 0.05 * sigma_cfg,
               f"sigma recovery within 5%: configured {sigma_cfg*1e3:.2f} mV, "
               f"got {result.sigma_hat*1e3:.2f} mV")
    return files, summary


def _cmd_dtle_bode(cfg: ScenarioConfig, out: Path, check: bool) -> tuple[list[Path], str]:
    from .plots import plot_bode

    params = cfg.dtle
    freqs = np.logspace(7, 11, 801)
    h = dtle_frequency_response(params, freqs)
    mag_db = 20.0 * np.log10(np.abs(h))
    phase_deg = np.degrees(np.angle(h))
    wz, wp1, wp2 = dtle_poles_zero(params)
    dc, hi, peaking = dtle_gains(params)

    files = []
    csv_path = out / "bode.csv"
    with open(csv_path, "w") as fh:
        fh.write("f_hz,mag_db,phase_deg\n")
        for f, m, p in zip(freqs, mag_db, phase_deg):
            fh.write(f"{f:.17g},{m:.17g},{p:.17g}\n")
    svg_path = out / "bode.svg"
    plot_bode(freqs, mag_db, phase_deg, svg_path)
    files += [csv_path, svg_path]

    summary = "\n".join([
        "equalizer small-signal summary",
        "------------------------------",
        f"zero              : {wz/2/np.pi/1e9:.3f} GHz",
        f"pole 1            : {wp1/2/np.pi/1e9:.3f} GHz",
        f"pole 2            : {wp2/2/np.pi/1e9:.3f} GHz",
        f"dc gain           : {dc:.4f} ({20*np.log10(dc):.2f} dB)",
        f"hi-freq gain      : {hi:.4f} ({20*np.log10(hi):.2f} dB)",
        f"peaking           : {peaking:.4f} ({20*np.log10(peaking):.2f} dB)",
    ]) + "\n"
    if check:
        gsum = params.gm + params.gmb
        _check(wp1 == (1.0 + gsum * params.rs / 2.0) * wz,
               "pole/zero ratio identity violated")
        _check(abs(complex(dtle_frequency_response(params, 0.0)) - dc) <= 1e-12 * dc,
               "dc gain mismatch")
    return files, summary


def _cmd_channel_sweep(cfg: ScenarioConfig, out: Path, check: bool) -> tuple[list[Path], str]:
    from .plots import plot_loss

    spec = calibrate_to_loss(cfg.channel.spec, cfg.channel.target_loss_db,
                             cfg.channel.loss_at_hz)
    freqs = np.linspace(0.0, 12e9, 1201)
    mag_db = 20.0 * np.log10(np.maximum(np.abs(channel_response(spec, freqs)), 1e-300))

    files = []
    csv_path = out / "channel_loss.csv"
    with open(csv_path, "w") as fh:
        fh.write("f_hz,loss_db\n")
        for f, m in zip(freqs, mag_db):
            fh.write(f"{f:.17g},{-m:.17g}\n")
    svg_path = out / "channel.svg"
    plot_loss(freqs, mag_db, svg_path,
              title=f"channel, {cfg.channel.target_loss_db:.1f} dB at "
                    f"{cfg.channel.loss_at_hz/1e9:.2f} GHz")
    files += [csv_path, svg_path]

    at = cfg.channel.loss_at_hz
    h_at = abs(channel_response(spec, [at])[0])
    summary = "\n".join([
        "channel sweep",
        "-------------",
        f"segments          : {spec.n_segments} inch",
        f"skin coefficient  : {spec.skin_loss_coeff:.6g} dB/sqrt(Hz)/inch",
        f"dielectric coeff  : {spec.dielectric_loss_coeff:.6g} dB/Hz/inch",
        f"|H| at target     : {20*np.log10(h_at):.3f} dB at {at/1e9:.2f} GHz",
    ]) + "\n"
    if check:
        _check(abs(-20 * np.log10(h_at) - cfg.channel.target_loss_db) <= 0.1,
               "calibrated loss off target by more than 0.1 dB")
        grid = np.linspace(0.0, 10e9, 10001)
        mg = 20.0 * np.log10(np.abs(channel_response(spec, grid)))
        _check(bool(np.all(np.diff(mg) <= 1e-9)),
               "|H| not monotone non-increasing over 0-10 GHz")
    return files, summary


_COMMANDS = {
    "link-sim": _cmd_link_sim,
    "adc-char": _cmd_adc_char,
    "comparator-mc": _cmd_comparator_mc,
    "dtle-bode": _cmd_dtle_bode,
    "channel-sweep": _cmd_channel_sweep,
}

_COMMAND_HELP = {
    "link-sim": "data source -> channel -> equalizer -> converter, with eyes",
    "adc-char": "sine tone conversion: SNDR/SFDR/ENOB and DNL/INL",
    "comparator-mc": "Monte-Carlo offset trip-point recovery",
    "dtle-bode": "equalizer pole/zero/gain frequency sweep",
    "channel-sweep": "calibrated channel loss versus frequency",
}


def run_scenario(cfg: ScenarioConfig, command: str, check: bool = False) -> RunResult:
    """Execute one command and emit its artifacts plus the run manifest."""
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files, summary = _COMMANDS[command](cfg, out, check)
    summary_path = out / "summary.txt"
    summary_path.write_text(summary)
    files.append(summary_path)
    manifest = _write_manifest(out, cfg, command, files)
    files.append(manifest)
    return RunResult(0, out, {p.name: p for p in files}, summary)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtlink",
        description="behavioral front-end simulator: channel, discrete-time "
                    "equalizer, charge-steering comparators, interleaved flash "
                    "converter, and their metrics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=_COMMAND_HELP[name])
        p.add_argument("--config", type=Path, default=None,
                       help="TOML scenario file")
        p.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                       help="override a config value (repeatable)")
        p.add_argument("--out", default=None, help="output directory "
                       f"(default: ${ENV_OUT_DIR} or ./out)")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--parallel", type=int, default=None, metavar="N",
                       help="worker threads for trials/channels")
        p.add_argument("--check", action="store_true",
                       help="assert the acceptance thresholds for this command")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_scenario(args.config) if args.config else ScenarioConfig()
        overrides = list(args.set)
        if args.seed is not None:
            overrides.append(f"run.master_seed={args.seed}")
        if args.parallel is not None:
            overrides.append(f"run.parallel={args.parallel}")
        out_dir = args.out or os.environ.get(ENV_OUT_DIR)
        if out_dir:
            overrides.append(f'run.out_dir="{out_dir}"')
        if overrides:
            cfg = apply_overrides(cfg, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_scenario(cfg, args.command, check=args.check)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CalibrationError as exc:
        print(f"calibration failure: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 4
    sys.stdout.write(result.summary)
    print(f"artifacts in {result.out_dir}/ ({len(result.files)} files)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
