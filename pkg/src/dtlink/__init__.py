"""Behavioral model of a 20-Gb/s ADC-based serial-link analog front end.

The chain under study: a lossy FR4 channel closes the transmit eye; four
staggered discrete-time linear equalizer slices (track-and-equalize, then
hold) reopen it and double as the sample-and-hold; charge-steering
comparators quantize against a shared reference ladder in a 4x interleaved
4-bit flash converter; and a metrics layer measures eyes, SNDR/SFDR/ENOB,
DNL/INL, and the power figures of merit.
"""

__version__ = "0.1.0"

from .channel import (CalibrationError, ChannelSpec, apply_channel,
                      calibrate_to_loss, channel_response)
from .comparator import (METASTABLE, ComparatorDecision, ComparatorParams,
                         McOffsetResult, amp_gain, amp_output, decide_array,
                         delta_t, evaluate, mc_offset_run, regen_delay)
from .dtle import (DtleParams, SwitchDevice, delivered_samples,
                   dtle_frequency_response, dtle_gains, dtle_poles_zero,
                   dtle_process, interleaved_frontend, pga_apply, rd_of_switch)
from .flash_adc import (AdcConfig, ClockPhaseSchedule, ConversionResult,
                        LadderSpec, ThermometerWord, adc_convert, build_ladder,
                        draw_offsets, encode_thermometer, gen_clock_phases,
                        thermometer_to_binary)
from .metrics import (EyeResult, MetricsReport, PowerReport, SpectralResult,
                      best_phase_opening, dnl_inl, enob_from_sndr, eye_diagram,
                      nearest_coherent_bin, power_fom, spectral_metrics)
from .signals import (BitStream, SampledWaveform, gen_prbs, gen_sine,
                      nrz_waveform)

__all__ = [
    "__version__",
    "BitStream", "SampledWaveform", "gen_prbs", "gen_sine", "nrz_waveform",
    "CalibrationError", "ChannelSpec", "apply_channel", "calibrate_to_loss",
    "channel_response",
    "DtleParams", "SwitchDevice", "delivered_samples", "dtle_frequency_response",
    "dtle_gains", "dtle_poles_zero", "dtle_process", "interleaved_frontend",
    "pga_apply", "rd_of_switch",
    "METASTABLE", "ComparatorDecision", "ComparatorParams", "McOffsetResult",
    "amp_gain", "amp_output", "decide_array", "delta_t", "evaluate",
    "mc_offset_run", "regen_delay",
    "AdcConfig", "ClockPhaseSchedule", "ConversionResult", "LadderSpec",
    "ThermometerWord", "adc_convert", "build_ladder", "draw_offsets",
    "encode_thermometer", "gen_clock_phases", "thermometer_to_binary",
    "EyeResult", "MetricsReport", "PowerReport", "SpectralResult",
    "best_phase_opening", "dnl_inl", "enob_from_sndr", "eye_diagram",
    "nearest_coherent_bin", "power_fom", "spectral_metrics",
]
