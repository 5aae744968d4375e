"""Concatenated-code error recursion and pulse economics.

Level-``n`` concatenation of the 7-qubit code fails when two or more of the
seven level-``n-1`` blocks fail.  The non-coding protocol is charged ``k``
repetitions to reach the same success probability, and ``R(n)`` is the ratio
of coding pulses to those repeated non-coding pulses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from ftbqc.channel import (
    ChannelParams,
    DecoyParams,
    pulse_lower_bound,
    transmittance,
    true_single_photon_fraction,
    gain,
)

Mode = Literal["exact", "approximate", "closed-form"]
THRESHOLD = 1 / 21
MAX_LEVEL = 4
CSV_HEADER = ("L_km", "n", "T", "Q_mu", "p1_lower", "N_lower", "N_n", "k", "R", "E")


@dataclass(frozen=True)
class ResourceParams:
    e0: float = 0.01
    S: float = 1000
    C: float = 1774
    f: float = 1e6
    epsilon: float = 1e-10
    levels: tuple[int, ...] = (0, 1, 2, 3, 4)

    def __post_init__(self) -> None:
        if not 0 < self.e0 < 1:
            raise ValueError("e0 must lie in (0, 1)")
        if self.S < 1 or self.C < 1 or self.f <= 0:
            raise ValueError("need S >= 1, C >= 1 and f > 0")
        if not self.levels:
            raise ValueError("level range must be non-empty")
        if any(not 0 <= n <= MAX_LEVEL for n in self.levels):
            raise ValueError(f"levels must lie in 0..{MAX_LEVEL}")
        object.__setattr__(self, "levels", tuple(self.levels))


def _block_failure(e: float) -> float:
    # binomial terms without the (1-e)^(7-k) survival factors
    return sum(math.comb(7, k) * e**k for k in range(2, 8))


def level_error(e0: float, n: int, mode: Mode = "exact") -> float:
    """Block error at concatenation level ``n``."""
    if not 0 < e0 < 1:
        raise ValueError("e0 must lie in (0, 1)")
    if n < 0:
        raise ValueError("level must be non-negative")
    if mode not in ("exact", "approximate", "closed-form"):
        raise ValueError(f"unknown mode {mode!r}")
    if n == 0:
        return e0
    if mode == "closed-form":
        return min(1.0, (21 * e0) ** (2**n) / 21)
    e = e0
    for _ in range(n):
        e = _block_failure(e) if mode == "exact" else 21 * e * e
        e = min(1.0, e)
    return e


def threshold_check(e0: float) -> bool:
    return e0 < THRESHOLD


def log_success(e: float, S: float) -> float:
    """``ln (1-e)^S``."""
    return S * math.log1p(-e)


def log_failure(e: float, S: float) -> float:
    """``ln(1 - (1-e)^S)``, accurate when the success probability is close to 0 or 1."""
    if e <= 0:
        raise OverflowError("zero error rate: the failure probability vanishes")
    x = log_success(e, S)
    return math.log(-math.expm1(x))


def repetitions(e0: float, e_n: float, S: float) -> float:
    """Repetitions ``k`` of an ``e0`` protocol matching the success of an ``e_n`` one."""
    if e_n == 0:
        raise OverflowError("e_n = 0 makes the repetition count diverge")
    if not 0 < e_n < 1 or not 0 < e0 < 1:
        raise ValueError("error rates must lie in (0, 1)")
    if S < 1:
        raise ValueError("S must be at least 1")
    return log_failure(e_n, S) / log_failure(e0, S)


def repetitions_ceil(e0: float, e_n: float, S: float) -> int:
    return math.ceil(repetitions(e0, e_n, S) - 1e-12)


def ancilla_per_qubit(n: int, C: float) -> float:
    """``sum_{i=1..n} 7^(i-1) C``."""
    if n < 0:
        raise ValueError("level must be non-negative")
    return (7**n - 1) * C / 6


def ancilla_pulses(n: int, C: float, S: float, T: float) -> float:
    if T <= 0:
        raise ValueError("transmittance must be positive")
    return ancilla_per_qubit(n, C) * S / T


@dataclass(frozen=True)
class PulseTotals:
    n: int
    T: float
    Q_mu: float
    p1_lower: float
    N_lower: float
    N_ancilla: float
    N_n: float
    N_n_approx: float


def total_pulses(
    n: int,
    params: ResourceParams,
    channel: ChannelParams,
    decoy: DecoyParams,
    *,
    p1: float | None = None,
) -> PulseTotals:
    """Data-pulse bound plus ancilla pulses; ``N_n_approx`` replaces ``Q_mu`` by ``mu T``."""
    T = transmittance(channel)
    budget = pulse_lower_bound(params.S, params.epsilon, decoy, channel, p1=p1)
    n_a = ancilla_pulses(n, params.C, params.S, T)
    approx_data = (
        params.S / T * math.log(params.epsilon / params.S)
        / (decoy.p_mu * decoy.mu * math.log1p(-budget.p1_lower))
    )
    return PulseTotals(
        n=n,
        T=T,
        Q_mu=budget.Q_mu,
        p1_lower=budget.p1_lower,
        N_lower=budget.N_lower,
        N_ancilla=n_a,
        N_n=budget.N_lower + n_a,
        N_n_approx=max(approx_data, params.S / (decoy.p_mu * decoy.mu * T)) + n_a,
    )


def resource_ratio(n: int, params: ResourceParams, channel: ChannelParams, decoy: DecoyParams) -> float:
    """``N_n / (k N^d)``; equals 1 at ``n = 0``."""
    if n == 0:
        return 1.0
    totals = total_pulses(n, params, channel, decoy)
    k = repetitions(params.e0, level_error(params.e0, n), params.S)
    return (totals.N_ancilla / totals.N_lower + 1) / k


def efficiency(S: float, f: float, N_n: float) -> float:
    """Prepared qubits per second, ``S f / N_n``."""
    if N_n <= 0:
        raise ValueError("pulse count must be positive")
    return S * f / N_n


def equal_success_efficiency(
    n: int,
    params: ResourceParams,
    channel: ChannelParams,
    decoy: DecoyParams,
    target_level: int | None = None,
) -> float:
    """Efficiency after repeating level ``n`` until it matches the success of ``target_level``.

    The target defaults to the deepest level in ``params.levels``, so every
    level is compared at one common success probability.
    """
    target = max(params.levels) if target_level is None else target_level
    e_n = level_error(params.e0, n)
    e_t = level_error(params.e0, target)
    reps = repetitions(e_n, e_t, params.S)
    return efficiency(params.S, params.f, reps * total_pulses(n, params, channel, decoy).N_n)


@dataclass(frozen=True)
class LevelReport:
    n: int
    e_exact: float
    e_approx: float
    ancilla_per_qubit: float
    N_ancilla: float
    N_n: float
    k: float
    R: float
    E: float
    totals: PulseTotals = field(repr=False)


def level_report(n: int, params: ResourceParams, channel: ChannelParams, decoy: DecoyParams) -> LevelReport:
    totals = total_pulses(n, params, channel, decoy)
    e_n = level_error(params.e0, n)
    k = repetitions(params.e0, e_n, params.S)
    return LevelReport(
        n=n,
        e_exact=e_n,
        e_approx=level_error(params.e0, n, "approximate"),
        ancilla_per_qubit=ancilla_per_qubit(n, params.C),
        N_ancilla=totals.N_ancilla,
        N_n=totals.N_n,
        k=k,
        R=resource_ratio(n, params, channel, decoy),
        E=equal_success_efficiency(n, params, channel, decoy),
        totals=totals,
    )


def optimal_level(
    params: ResourceParams,
    channel: ChannelParams,
    decoy: DecoyParams,
    levels: Iterable[int] | None = None,
) -> int:
    """Level minimising ``R(n)``; ties go to the smaller level."""
    levels = sorted(params.levels if levels is None else levels)
    if not levels:
        raise ValueError("level range must be non-empty")
    return min(levels, key=lambda n: (resource_ratio(n, params, channel, decoy), n))


# sweep rows ----------------------------------------------------------------


def sweep_row(L: float, n: int, params: ResourceParams, channel: ChannelParams, decoy: DecoyParams) -> dict:
    ch = channel.at(L)
    rep = level_report(n, params, ch, decoy)
    t = rep.totals
    return dict(L_km=L, n=n, T=t.T, Q_mu=t.Q_mu, p1_lower=t.p1_lower, N_lower=t.N_lower,
                N_n=rep.N_n, k=rep.k, R=rep.R, E=rep.E)


def asymptotic_row(L: float, params: ResourceParams, channel: ChannelParams, decoy: DecoyParams) -> dict:
    """Ideal reference using the exact single-photon fraction of a background-free channel, without coding overhead."""
    ch = ChannelParams(channel.alpha, L, channel.t_s, channel.eta_s, 0.0)
    T = transmittance(ch)
    p1 = true_single_photon_fraction(decoy.mu, T, 0.0)
    budget = pulse_lower_bound(params.S, params.epsilon, decoy, ch, p1=p1)
    return dict(L_km=L, n=0, T=T, Q_mu=gain(decoy.mu, T, 0.0), p1_lower=p1,
                N_lower=budget.N_lower, N_n=budget.N_lower, k=1.0, R=1.0,
                E=efficiency(params.S, params.f, budget.N_lower))


def format_row(row: dict) -> str:
    out = []
    for key in CSV_HEADER:
        v = row[key]
        out.append(str(v) if key == "n" else f"{float(v):.10g}")
    return ",".join(out)


def rows_to_csv(rows: Sequence[dict]) -> str:
    return ",".join(CSV_HEADER) + "\n" + "".join(format_row(r) + "\n" for r in rows)
