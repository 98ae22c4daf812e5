"""Static vector-graphic emitters for the standard report figures.

Matplotlib runs headless here and every SVG is written with a fixed hash salt
and no date metadata, so rerunning a scenario reproduces the files byte for
byte.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "dtlink"

import matplotlib.pyplot as plt
import numpy as np

from .metrics import EyeResult

_SAVE_KW = dict(metadata={"Date": None}, bbox_inches="tight")


def plot_eye(eye: EyeResult, path, title: str = "eye diagram") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    extent = [eye.time_edges[0], eye.time_edges[-1],
              eye.volt_edges[0] * 1e3, eye.volt_edges[-1] * 1e3]
    ax.imshow(np.log1p(eye.matrix.T), origin="lower", aspect="auto",
              extent=extent, cmap="inferno")
    ax.set_xlabel("time (UI)")
    ax.set_ylabel("differential voltage (mV)")
    ax.set_title(f"{title}  (vertical opening {eye.vertical_opening*1e3:.1f} mV)")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_spectrum(freqs, power_dbc, path, signal_bin=None,
                  title: str = "output spectrum") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.asarray(freqs) / 1e9, power_dbc, lw=0.8)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("power (dBc)")
    ax.set_ylim(-110, 5)
    ax.grid(alpha=0.3)
    ax.set_title(title)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_dnl_inl(dnl, inl, path) -> None:
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6, 5), sharex=False)
    ax0.bar(np.arange(len(dnl)), dnl, width=0.9)
    ax0.set_ylabel("DNL (LSB)")
    ax0.grid(alpha=0.3)
    ax1.plot(np.arange(len(inl)), inl, marker="o", ms=3)
    ax1.set_ylabel("INL (LSB)")
    ax1.set_xlabel("code")
    ax1.grid(alpha=0.3)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_bode(freqs, mag_db, phase_deg, path, title: str = "equalizer response") -> None:
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ax0.semilogx(freqs, mag_db)
    ax0.set_ylabel("|H| (dB)")
    ax0.grid(alpha=0.3, which="both")
    ax0.set_title(title)
    ax1.semilogx(freqs, phase_deg)
    ax1.set_ylabel("phase (deg)")
    ax1.set_xlabel("frequency (Hz)")
    ax1.grid(alpha=0.3, which="both")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_loss(freqs, mag_db, path, title: str = "channel response") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.asarray(freqs) / 1e9, mag_db)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("|H| (dB)")
    ax.grid(alpha=0.3)
    ax.set_title(title)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_offset_histogram(trip_points, sigma_hat, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(np.asarray(trip_points) * 1e3, bins=60)
    ax.set_xlabel("trip point (mV)")
    ax.set_ylabel("count")
    ax.set_title(f"comparator trip points  (sigma {sigma_hat*1e3:.2f} mV)")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_enob_vs_freq(freqs, enobs, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.asarray(freqs) / 1e9, enobs, marker="o")
    ax.set_xlabel("input frequency (GHz)")
    ax.set_ylabel("ENOB (bits)")
    ax.grid(alpha=0.3)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
