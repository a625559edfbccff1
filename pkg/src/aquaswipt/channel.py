"""Underwater acoustic link-budget computations.

- thorp_absorption: empirical seawater absorption (dB/km)
- source_level: projector source level from electrical input power
- transmission_loss_db: spreading + absorption loss over a range
- noise_psd_db: ambient noise components and their power sum
- received_snr_db: passive sonar equation
- shannon_throughput_bps: link capacity with an outage threshold

Frequencies are in kHz, ranges in metres, levels in dB re 1 uPa @ 1 m.
All functions are pure and accept numpy arrays in place of scalars.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    """Static description of one acoustic channel.

    ``noise_override_db`` replaces the composite ambient-noise model with a
    constant in-band noise level (dB) when set.
    """

    frequency_khz: float = 24.0
    bandwidth_hz: float = 4000.0
    spreading_factor_k: float = 1.5
    wind_speed_mps: float = 10.0
    shipping_factor: float = 0.0
    sound_speed_mps: float = 1500.0
    noise_override_db: float | None = None

    def __post_init__(self):
        if self.frequency_khz <= 0:
            raise ValueError(f"frequency_khz must be > 0, got {self.frequency_khz}")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if not 1.0 <= self.spreading_factor_k <= 2.0:
            raise ValueError(
                f"spreading_factor_k must be in [1, 2], got {self.spreading_factor_k}"
            )
        if self.wind_speed_mps < 0:
            raise ValueError(f"wind_speed_mps must be >= 0, got {self.wind_speed_mps}")
        if not 0.0 <= self.shipping_factor <= 1.0:
            raise ValueError(
                f"shipping_factor must be in [0, 1], got {self.shipping_factor}"
            )
        if self.sound_speed_mps <= 0:
            raise ValueError(
                f"sound_speed_mps must be > 0, got {self.sound_speed_mps}"
            )


@dataclass(frozen=True)
class ModemSpec:
    """Acoustic modem: transmit side plus the receive decoding threshold.

    ``source_level_db`` overrides the level derived from electrical power
    when set; ``electrical_power_w`` is still used for energy accounting.
    """

    electrical_power_w: float = 1000.0
    ea_efficiency: float = 0.5
    directivity_index_db: float = 0.0
    source_level_db: float | None = None
    min_snr_db: float = 0.0

    def __post_init__(self):
        if self.electrical_power_w <= 0:
            raise ValueError(
                f"electrical_power_w must be > 0, got {self.electrical_power_w}"
            )
        if not 0.0 < self.ea_efficiency <= 1.0:
            raise ValueError(
                f"ea_efficiency must be in (0, 1], got {self.ea_efficiency}"
            )


class NoiseComponents(NamedTuple):
    """Ambient noise PSDs in dB re 1 uPa^2/Hz plus their power-domain sum."""

    turbulence_db: float
    shipping_db: float
    waves_db: float
    thermal_db: float
    total_db: float


def thorp_absorption(frequency_khz):
    """Thorp seawater absorption coefficient in dB/km for f in kHz."""
    f = np.asarray(frequency_khz, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency_khz must be > 0")
    f2 = f * f
    out = 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003
    return out if out.ndim else float(out)


def source_level(modem: ModemSpec):
    """Source level in dB re 1 uPa @ 1 m, from electrical power unless overridden."""
    if modem.source_level_db is not None:
        return float(modem.source_level_db)
    return float(
        170.8
        + 10.0 * np.log10(modem.electrical_power_w)
        + 10.0 * np.log10(modem.ea_efficiency)
        + modem.directivity_index_db
    )


def transmission_loss_db(range_m, params: ChannelParams):
    """One-way transmission loss: k*10*log10(r) + absorption(f)*r_km, in dB.

    Ranges below the 1 m reference distance are rejected.
    """
    r = np.asarray(range_m, dtype=float)
    if np.any(r < 1.0):
        raise ValueError("range_m must be >= 1 m (reference distance)")
    alpha = thorp_absorption(params.frequency_khz)
    out = params.spreading_factor_k * 10.0 * np.log10(r) + (r / 1000.0) * alpha
    return out if out.ndim else float(out)


def noise_psd_db(frequency_khz, params: ChannelParams) -> NoiseComponents:
    """Turbulence, shipping, wave and thermal noise PSDs at f, plus the total.

    Components are summed in the linear power domain and converted back to dB.
    """
    f = np.asarray(frequency_khz, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency_khz must be > 0")
    s = params.shipping_factor
    w = params.wind_speed_mps
    n_t = 17.0 - 30.0 * np.log10(f)
    n_s = 30.0 + 20.0 * s + 26.0 * np.log10(f) - 60.0 * np.log10(f + 0.03)
    n_w = 50.0 + 7.5 * np.sqrt(w) + 20.0 * np.log10(f) - 40.0 * np.log10(f + 0.4)
    n_th = -15.0 + 20.0 * np.log10(f)
    total = 10.0 * np.log10(
        10.0 ** (n_t / 10.0)
        + 10.0 ** (n_s / 10.0)
        + 10.0 ** (n_w / 10.0)
        + 10.0 ** (n_th / 10.0)
    )
    if f.ndim:
        return NoiseComponents(n_t, n_s, n_w, n_th, total)
    return NoiseComponents(float(n_t), float(n_s), float(n_w), float(n_th), float(total))


def noise_level_db(params: ChannelParams) -> float:
    """In-band noise level: PSD total + 10*log10(B), or the constant override."""
    if params.noise_override_db is not None:
        return float(params.noise_override_db)
    total = noise_psd_db(params.frequency_khz, params).total_db
    return float(total + 10.0 * np.log10(params.bandwidth_hz))


def received_snr_db(source: ModemSpec, range_m, params: ChannelParams,
                    receive_di_db: float = 0.0):
    """Received SNR in dB: SL - TL - NL + DI.

    The transmit directivity is already folded into the source level; the
    optional ``receive_di_db`` is the receiving array's gain (default omni).
    """
    sl = source_level(source)
    tl = transmission_loss_db(range_m, params)
    nl = noise_level_db(params)
    out = sl - tl - nl + receive_di_db
    return out if np.ndim(out) else float(out)


def shannon_throughput_bps(snr_db, params: ChannelParams, min_snr_db: float):
    """Capacity B*log2(1 + snr) in bit/s, exactly 0 below the outage threshold."""
    snr = np.asarray(snr_db, dtype=float)
    rate = params.bandwidth_hz * np.log2(1.0 + 10.0 ** (snr / 10.0))
    out = np.where(snr >= min_snr_db, rate, 0.0)
    return out if out.ndim else float(out)
