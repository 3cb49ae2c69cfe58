"""Radio-layer math: SINR, success probability under fading, and BER.

All functions broadcast over numpy arrays of powers. Powers are in watts and
ratios are linear; dB/dBm only appear in the conversion helpers at the bottom.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import erfc

from .errors import ConfigurationError

__all__ = [
    "ChannelKind",
    "RadioParams",
    "GainSample",
    "sinr",
    "success",
    "success_probability",
    "ber_bpsk",
    "ber_instantaneous",
    "expected_ber",
    "dbm_to_watts",
    "watts_to_dbm",
    "db_to_linear",
    "linear_to_db",
]


class ChannelKind(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class RadioParams:
    """Noise, SINR threshold and channel-gain model of one subcarrier.

    ``mean_gain_ap`` and ``mean_gain_jammer`` are the power gains used as-is
    by the deterministic model and as exponential means by the Rayleigh model.
    """

    n0_watts: float
    tau_linear: float
    mean_gain_ap: float = 1.0
    mean_gain_jammer: float = 1.0
    channel_kind: ChannelKind = ChannelKind.DETERMINISTIC

    def __post_init__(self):
        object.__setattr__(self, "channel_kind", ChannelKind(self.channel_kind))
        for name in ("n0_watts", "tau_linear", "mean_gain_ap", "mean_gain_jammer"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class GainSample:
    g_ap: float
    g_j: float

    def __post_init__(self):
        if self.g_ap < 0 or self.g_j < 0:
            raise ConfigurationError(f"channel gains must be >= 0, got {self}")


def sinr(p, j, gains: GainSample, params: RadioParams):
    """Instantaneous SINR ``g_ap p / (N0 + g_j j)``."""
    p = np.asarray(p, dtype=float)
    j = np.asarray(j, dtype=float)
    return gains.g_ap * p / (params.n0_watts + gains.g_j * j)


def success(p, j, gains: GainSample, params: RadioParams):
    """True where the SINR reaches the threshold (boundary counts as success).

    Evaluated in product form so that ``p = tau (N0 + g_j j) / g_ap`` lands
    exactly on the boundary instead of one ulp below it.
    """
    p = np.asarray(p, dtype=float)
    j = np.asarray(j, dtype=float)
    return gains.g_ap * p >= params.tau_linear * (params.n0_watts + gains.g_j * j)


def success_probability(p, j, params: RadioParams):
    """Probability over the gain distribution that a transmission succeeds.

    Deterministic channels return the success indicator at the mean gains.
    Rayleigh channels (independent exponential power gains) use

        exp(-tau N0 / (g_ap p)) / (1 + tau g_j j / (g_ap p)),

    with the value 0 at ``p = 0``.
    """
    p = np.asarray(p, dtype=float)
    j = np.asarray(j, dtype=float)
    if params.channel_kind is ChannelKind.DETERMINISTIC:
        mean = GainSample(params.mean_gain_ap, params.mean_gain_jammer)
        return success(p, j, mean, params).astype(float)
    p, j = np.broadcast_arrays(p, j)
    out = np.zeros(p.shape)
    pos = p > 0
    # written without 1/p so subnormal powers cannot overflow
    signal = params.mean_gain_ap * p[pos]
    interference = params.tau_linear * params.mean_gain_jammer * j[pos]
    with np.errstate(over="ignore"):
        fade = np.exp(-params.tau_linear * params.n0_watts / signal)
    out[pos] = fade * signal / (signal + interference)
    return out if out.ndim else float(out)


def ber_bpsk(gamma):
    """Coherent BPSK bit-error rate ``0.5 erfc(sqrt(gamma))``."""
    return 0.5 * erfc(np.sqrt(np.asarray(gamma, dtype=float)))


ber_instantaneous = ber_bpsk

BerModel = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=16)
def _quadrature(n_nodes: int):
    # AP-gain axis: u = v**2 turns the sqrt kink of erfc(sqrt(c u)) at u=0
    # into a smooth integrand before applying Gauss-Laguerre in v.
    v, w = np.polynomial.laguerre.laggauss(n_nodes)
    ap_nodes = v * v
    ap_weights = w * 2.0 * v * np.exp(v - v * v)
    # Jammer-gain axis: interference is linear in the gain, plain Gauss-Laguerre.
    j_nodes, j_weights = np.polynomial.laguerre.laggauss(n_nodes)
    # Normalized so a constant BER (p = 0) integrates exactly.
    return ap_nodes, ap_weights / ap_weights.sum(), j_nodes, j_weights / j_weights.sum()


def expected_ber(p, j, params: RadioParams, ber: BerModel = ber_bpsk, n_nodes: int = 32):
    """Bit-error rate averaged over the channel-gain distribution.

    The Rayleigh case uses a fixed ``n_nodes x n_nodes`` Gauss-Laguerre rule over
    the two exponential gains, so results are bit-reproducible.
    """
    p = np.asarray(p, dtype=float)
    j = np.asarray(j, dtype=float)
    if params.channel_kind is ChannelKind.DETERMINISTIC:
        mean = GainSample(params.mean_gain_ap, params.mean_gain_jammer)
        return ber(sinr(p, j, mean, params))
    ap_nodes, ap_weights, j_nodes, j_weights = _quadrature(n_nodes)
    g_ap = params.mean_gain_ap * ap_nodes[:, None]
    g_j = params.mean_gain_jammer * j_nodes[None, :]
    weights = ap_weights[:, None] * j_weights[None, :]
    pp = p[..., None, None]
    jj = j[..., None, None]
    gamma = g_ap * pp / (params.n0_watts + g_j * jj)
    out = (weights * ber(gamma)).sum(axis=(-2, -1))
    # no signal: gamma is 0 for every gain draw, skip the rounding of the sum
    out = np.where(p == 0, ber(np.zeros(1))[0], out)
    return out if out.ndim else float(out)


def dbm_to_watts(x):
    return 10.0 ** ((np.asarray(x, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float)) + 30.0


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))
