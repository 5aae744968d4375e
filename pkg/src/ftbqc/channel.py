"""Fibre loss and decoy-state gains feeding the pulse lower bound."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ChannelParams:
    alpha: float = 0.2  # dB/km
    L: float = 0.0  # km
    t_s: float = 0.45
    eta_s: float = 0.1
    Y0: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.L < 0:
            raise ValueError("alpha and L must be non-negative")
        for name in ("t_s", "eta_s", "Y0"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def at(self, L: float) -> ChannelParams:
        return ChannelParams(self.alpha, L, self.t_s, self.eta_s, self.Y0)


@dataclass(frozen=True)
class DecoyParams:
    mu: float = 0.6
    v1: float = 0.125
    v2: float = 0.0
    p_mu: float = 0.9
    p_v1: float = 0.05
    p_v2: float = 0.05

    def __post_init__(self) -> None:
        if not self.mu > self.v1 > self.v2 >= 0:
            raise ValueError("need mu > v1 > v2 >= 0")
        probs = (self.p_mu, self.p_v1, self.p_v2)
        if min(probs) <= 0 or abs(sum(probs) - 1) > 1e-9:
            raise ValueError("choice probabilities must be positive and sum to 1")


@dataclass(frozen=True)
class PulseBudget:
    S: float
    epsilon: float
    N_lower: float
    Q_mu: float
    p1_lower: float
    floored: bool = False


def transmittance(ch: ChannelParams) -> float:
    return ch.t_s * ch.eta_s * 10 ** (-ch.alpha * ch.L / 10)


def gain(mu: float, T: float, Y0: float = 0.0) -> float:
    """Detection probability ``Y0 + 1 - exp(-T mu)`` of a Poissonian pulse, capped at 1."""
    if mu <= 0:
        raise ValueError("mean photon number must be positive")
    return min(1.0, Y0 - math.expm1(-T * mu))


def yield_n(n: int, T: float, Y0: float = 0.0) -> float:
    """n-photon yield of a threshold detector behind transmittance ``T``."""
    return min(1.0, Y0 + 1 - (1 - T) ** n)


def true_single_photon_fraction(mu: float, T: float, Y0: float = 0.0) -> float:
    """Fraction of signal detections caused by single-photon pulses."""
    return mu * math.exp(-mu) * yield_n(1, T, Y0) / gain(mu, T, Y0)


def single_photon_yield_lower(
    d: DecoyParams, Q_mu: float, Q_v1: float, Y0: float = 0.0
) -> float:
    """Vacuum+weak decoy bound on the single-photon yield."""
    mu, v = d.mu, d.v1
    denom = mu * v - v * v
    if denom <= 0:
        raise ValueError("non-positive estimator denominator")
    return (mu / denom) * (
        Q_v1 * math.exp(v)
        - Q_mu * math.exp(mu) * v * v / (mu * mu)
        - ((mu * mu - v * v) / (mu * mu)) * Y0
    )


def p1_lower_bound(
    d: DecoyParams,
    T: float,
    Y0: float = 0.0,
    *,
    gains: tuple[float, float] | None = None,
) -> float:
    """Lower bound on the single-photon fraction of signal detections.

    ``gains`` overrides the model gains ``(Q_mu, Q_v1)``, e.g. with measured values.
    """
    if d.v2 != 0:
        raise ValueError("only the vacuum+weak configuration (v2 = 0) is supported")
    if gains is None:
        Q_mu, Q_v1 = gain(d.mu, T, Y0), gain(d.v1, T, Y0)
    else:
        Q_mu, Q_v1 = gains
    if Q_mu <= 0:
        raise ValueError("signal gain must be positive")
    y1 = single_photon_yield_lower(d, Q_mu, Q_v1, Y0)
    p1 = d.mu * math.exp(-d.mu) * y1 / Q_mu
    return min(max(p1, 1e-300), 1 - 1e-16)


def pulse_lower_bound(
    S: float,
    epsilon: float,
    d: DecoyParams,
    ch: ChannelParams,
    *,
    p1: float | None = None,
) -> PulseBudget:
    """``S/(p_mu Q_mu) * ln(eps/S) / ln(1 - p1)``, floored at ``S/(p_mu Q_mu)``.

    ``p1`` replaces the decoy bound (the exact fraction gives the asymptotic curve).
    """
    if S < 1:
        raise ValueError("S must be at least 1")
    if not 0 < epsilon < S:
        raise ValueError("need 0 < epsilon < S for a positive bound")
    T = transmittance(ch)
    Q_mu = gain(d.mu, T, ch.Y0)
    if Q_mu <= 0:
        raise ValueError("signal gain vanishes; no pulses get through")
    if p1 is None:
        p1 = p1_lower_bound(d, T, ch.Y0)
    base = S / (d.p_mu * Q_mu)
    n = base * math.log(epsilon / S) / math.log1p(-p1)
    floored = n < base
    return PulseBudget(S, epsilon, max(n, base), Q_mu, p1, floored)
