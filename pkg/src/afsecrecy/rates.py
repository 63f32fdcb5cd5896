"""Destination/eavesdropper SNRs and the secure AF rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .network import EcgalNetwork, ScalingAssignment, h_source_dest, noise_gain_sum


@dataclass(frozen=True)
class RateResult:
    snr_t: float
    snr_e: float
    rate_bits: float


def _snr(net: EcgalNetwork, s: ScalingAssignment, eavesdropper: bool) -> float:
    h = h_source_dest(net, s, eavesdropper)
    return (net.P_s / net.sigma2) * h * h / (1.0 + noise_gain_sum(net, s, eavesdropper))


def snr_destination(net: EcgalNetwork, s: ScalingAssignment) -> float:
    """(P_s / sigma^2) h_st^2 / (1 + sum_{l,j} h_{lj,t}^2)."""
    return _snr(net, s, eavesdropper=False)


def snr_eavesdropper(net: EcgalNetwork, s: ScalingAssignment) -> float:
    """As :func:`snr_destination` with the last hop gain replaced by h_e."""
    return _snr(net, s, eavesdropper=True)


def _check_snr(name, x):
    x = float(x)
    if math.isnan(x) or x < 0.0 or math.isinf(x):
        raise ValueError(f"{name} must be finite and >= 0, got {x!r}")
    return x


def log_ratio(snr_t: float, snr_e: float) -> float:
    """Unclamped 0.5*log2((1+snr_t)/(1+snr_e)), possibly negative."""
    snr_t = _check_snr("snr_t", snr_t)
    snr_e = _check_snr("snr_e", snr_e)
    # log1p of (ratio - 1) keeps precision when both SNRs are tiny
    return 0.5 * math.log1p((snr_t - snr_e) / (1.0 + snr_e)) / math.log(2.0)


def secrecy_rate(snr_t: float, snr_e: float) -> float:
    """Secrecy rate in bits per channel use, clamped at zero."""
    return max(0.0, log_ratio(snr_t, snr_e))


def evaluate(net: EcgalNetwork, s: ScalingAssignment) -> RateResult:
    snr_t = float(snr_destination(net, s))
    snr_e = float(snr_eavesdropper(net, s))
    return RateResult(snr_t, snr_e, secrecy_rate(snr_t, snr_e))
