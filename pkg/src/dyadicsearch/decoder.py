"""Per-bit Bayesian decoding and the exact distortion oracle.

Bits of the target are independent under the uniform prior, and transmissions
are memoryless, so the decoder state is just the per-bit posterior
p_k = P(X_k = 1 | history). One channel output y moves a posterior p to

    p' = f1(y) p / (f1(y) p + f0(y) (1 - p)).

The minimum mean squared error estimate and its conditional error follow in
closed form; bits beyond the tracked depth sit at their prior 1/2 and their
contribution is summed analytically.

The exact oracle exploits exchangeability: t i.i.d. outputs enter the
posterior only through their histogram, so E[p(1-p)] after t uses is an exact
finite sum over the C(t+m-1, m-1) histograms of an m-symbol alphabet (t+1
terms for binary channels). This is what makes exact large-n sweeps cheap.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec
from .errors import BudgetExceededError, ValidationError
from .policy import TransmissionPattern

HISTOGRAM_BUDGET = 1_000_000

_LOG_ZERO = -1e30  # stand-in for log 0; exp underflows to exactly 0.0
_LOG_ODDS_SWITCH = 1e-12


@dataclass(frozen=True)
class PosteriorState:
    """Per-bit posteriors p_k, k = 1..depth; untracked bits are at prior 1/2."""

    p: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not (0.0 <= x <= 1.0) for x in self.p):
            raise ValidationError("posterior probabilities must lie in [0, 1]")

    @property
    def depth(self) -> int:
        return len(self.p)


def posterior_update(p: float, y, ch: ChannelSpec) -> float:
    """One Bayes step for a single bit given output symbol y.

    0 and 1 are fixed points. Near-certain posteriors are updated in log-odds
    form to avoid underflow in p (1 - p).
    """
    if not (0.0 <= p <= 1.0):
        raise ValidationError(f"posterior {p!r} outside [0, 1]")
    i = ch.symbol_index(y)
    a, b = ch.f0[i], ch.f1[i]
    den = b * p + a * (1.0 - p)
    if den == 0.0:
        raise ValidationError("impossible observation: zero likelihood under the posterior")
    if p == 0.0 or p == 1.0:
        return p
    if p * (1.0 - p) < _LOG_ODDS_SWITCH and a > 0.0 and b > 0.0:
        s = math.log(p / (1.0 - p)) + math.log(b / a)
        return 1.0 / (1.0 + math.exp(-s))
    return b * p / den


def mmse_estimate(state: PosteriorState) -> float:
    """E[X | history] = sum_k p_k 2^(-k), the prior tail summed in closed form.

    Written as 1/2 + sum_k (p_k - 1/2) 2^(-k) so the all-prior state returns
    exactly 0.5.
    """
    return 0.5 + math.fsum(
        (pk - 0.5) * 2.0 ** -(k + 1) for k, pk in enumerate(state.p)
    )


def conditional_distortion(state: PosteriorState) -> float:
    """E[(X_hat - X)^2 | history] = sum_k 4^(-k) p_k (1 - p_k) plus prior tail.

    Centered on the prior so the all-prior state returns exactly 1/12 (the
    variance of Uniform(0, 1)).
    """
    return 1.0 / 12.0 + math.fsum(
        (pk * (1.0 - pk) - 0.25) * 4.0 ** -(k + 1) for k, pk in enumerate(state.p)
    )


def _histograms(t: int, m: int) -> np.ndarray:
    """All m-part compositions of t as an integer array, one histogram per row."""
    if m == 2:
        j = np.arange(t + 1, dtype=np.int64)
        return np.stack([t - j, j], axis=1)
    rows: list[tuple[int, ...]] = []

    def rec(prefix: list[int], left: int, parts: int) -> None:
        if parts == 1:
            rows.append((*prefix, left))
            return
        for first in range(left + 1):
            rec(prefix + [first], left - first, parts - 1)

    rec([], t, m)
    return np.asarray(rows, dtype=np.int64)


def _safe_log(masses: tuple[float, ...]) -> np.ndarray:
    return np.array([math.log(p) if p > 0.0 else _LOG_ZERO for p in masses])


@functools.lru_cache(maxsize=None)
def exact_bit_variance(t_k: int, ch: ChannelSpec) -> float:
    """Exact E[Var(X_k | history)] after t_k i.i.d. uses for bit k.

    Enumerates output histograms: with the fair prior on the bit, a histogram
    h has weight (P(h|0) + P(h|1))/2 and posterior variance
    P(h|0) P(h|1) / (P(h|0) + P(h|1))^2, evaluated in log space. t_k = 0 is
    the prior variance 1/4.
    """
    if t_k < 0:
        raise ValidationError("repetition count must be >= 0")
    if t_k == 0:
        return 0.25
    m = len(ch.outputs)
    count = math.comb(t_k + m - 1, m - 1)
    if count > HISTOGRAM_BUDGET:
        raise BudgetExceededError(
            f"histogram enumeration too large: {count} exceeds {HISTOGRAM_BUDGET}"
        )
    H = _histograms(t_k, m)
    lg = np.array([math.lgamma(i + 1.0) for i in range(t_k + 1)])
    log_mult = lg[t_k] - lg[H].sum(axis=1)
    lp0 = log_mult + H @ _safe_log(ch.f0)
    lp1 = log_mult + H @ _safe_log(ch.f1)
    weight = 0.5 * np.exp(lp0) + 0.5 * np.exp(lp1)
    # p (1 - p) = e^d / (1 + e^d)^2 with d = lp1 - lp0, stable via exp(-|d|).
    e = np.exp(-np.abs(lp1 - lp0))
    var = e / (1.0 + e) ** 2
    return float(np.sum(weight * var))


def exact_distortion(t: TransmissionPattern, ch: ChannelSpec) -> float:
    """Exact end-to-end distortion D(t) = sum_k 4^(-k) E[Var(X_k | history)].

    Per-bit terms come from ``exact_bit_variance``; bits beyond the last
    transmitted index contribute their prior variance, summed in closed form.
    Positive-term summation keeps relative precision at any scale.
    """
    head = math.fsum(
        4.0 ** -(k + 1) * exact_bit_variance(tk, ch) for k, tk in enumerate(t.t)
    )
    return head + 0.25 * (4.0**-t.q / 3.0)
