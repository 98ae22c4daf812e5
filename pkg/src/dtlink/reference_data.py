"""Published figures for the modeled 65-nm front-end design.

These numbers come from the transistor-level design this package models
behaviorally.  They are inputs to report tables and ledger arithmetic, never
outputs of the simulation: power in particular is declared, not estimated.
"""

# Converter power ledger (W) and its total as published (rounded to 15.5 mW).
POWER_BREAKDOWN_W = {
    "reference_ladder": 200e-6,
    "comparators": 11.34e-3,
    "clock_buffers": 4e-3,
}
ADC_TOTAL_POWER_W = 15.5e-3

# Comparator power: fully differential and single-ended variants, with the
# reset+amplification vs regeneration split (W).
COMPARATOR_POWER_DIFF_W = 189e-6
COMPARATOR_POWER_SE_W = 66e-6
COMPARATOR_SPLIT_DIFF_W = {"reset_amplification": 163e-6, "regeneration": 26e-6}
COMPARATOR_SPLIT_SE_W = {"reset_amplification": 54e-6, "regeneration": 12e-6}
N_COMPARATORS = 60              # 4 interleaved banks x 15

# Equalizer: per-slice power from a 1.2-V supply; four slices run in parallel.
DTLE_POWER_W = 0.57e-3
DTLE_SUPPLY_V = 1.2
N_DTLE = 4

# Front-end aggregate energy: (15.5 mW + 4 x 0.57 mW) / 20 Gb/s.
FRONT_END_TOTAL_POWER_W = 17.78e-3
ENERGY_PER_BIT_J = 0.89e-12

# Converter performance summary at the 9.84-GHz test tone.
ADC_PERFORMANCE = {
    "sampling_rate_hz": 20e9,
    "input_range_diff_v": 0.6,
    "input_common_mode_v": 0.75,
    "sfdr_db": 33.58,
    "sndr_db": 23.86,
    "enob_bits": 3.67,
    "power_w": 15.5e-3,
    "fomw_j": 60.8e-15,
}

# Comparator Monte-Carlo offset: total input-referred sigma and the
# input-pair-only contribution (97% of the total).
OFFSET_SIGMA_V = 14.4e-3
INPUT_PAIR_OFFSET_SIGMA_V = 13.9e-3

# Kick-back disturbance seen at the reference node.
KICKBACK_V = 1e-3

# Clock distribution: capacitive load and buffer power per interleaved branch.
CLOCK_LOAD_PER_BRANCH_F = 160e-15
CLOCK_BUFFER_POWER_PER_BRANCH_W = 1e-3

# Head-to-head with the conventional dynamic (StrongARM-style) comparator at
# a 5-GHz clock; the baseline circuit itself is not modeled.
COMPARATOR_COMPARISON = {
    "strongarm": {
        "power_w": 256e-6,
        "max_speed_5mv_hz": 5e9,
        "sensitivity_v": 4e-3,
        "offset_3sigma_wo_input_pair_v": 11.16e-3,
    },
    "this_design": {
        "power_w": 66e-6,
        "power_diff_w": 189e-6,
        "max_speed_5mv_hz": 6e9,
        "sensitivity_v": 1e-3,
        "offset_3sigma_wo_input_pair_v": 0.5e-3,
    },
}

# Equalizer comparison row for this design (per 5-Gb/s channel slice).
DTLE_SUMMARY = {
    "technology": "65 nm",
    "supply_v": 1.2,
    "data_rate_per_channel_bps": 5e9,
    "channel_loss_db": 12.0,
    "gain_at_nyquist_db": 20.0,
    "power_w": 0.57e-3,
}
