"""Transmission patterns, distortion bounds, and policy construction.

A transmission pattern t = (t_1, ..., t_q) says how many of the n channel
uses go to each bit of the target's binary expansion. For a channel with
Chernoff information C and mean absolute log-likelihood ratio B, the minimum
end-to-end mean squared error D(t) is sandwiched by

    L(t) = 1/4 sum_{k>=1} 4^(-k) exp(-t_k B)   <=   D(t)   <=
    U(t) =     sum_{k>=1} 4^(-k) exp(-t_k C)

(untransmitted indices contribute their prior terms; the infinite tail
beyond the last transmitted bit is summed in closed form).

An *efficient* pattern minimizes U subject to sum t_k = n. Because U is
separable with convex decreasing per-index terms, allocating the n uses one
at a time to the index with the largest decrease of U finds the exact integer
minimum; exhaustive enumeration over bounded-depth compositions is kept as an
independent route.

The staircase ("Aurelian") policy allocates t_k = (q - k + 1) r with
r = floor(ln4 / C) and q the largest depth whose staircase fits the budget,
then tops up the remainder greedily. Its upper bound decays like
exp(-A2 sqrt(n)) with A2 = sqrt(2 r) C.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .channel import LN4, InfoConstants
from .errors import BudgetExceededError, ValidationError

PATTERN_BUDGET = 10_000_000

_CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class TransmissionPattern:
    """Repetition counts per bit index, trailing zeros trimmed."""

    t: tuple[int, ...]

    def __post_init__(self) -> None:
        if any((not isinstance(x, int)) or x < 0 for x in self.t):
            raise ValidationError("pattern entries must be non-negative integers")
        if self.t and self.t[-1] == 0:
            trimmed = list(self.t)
            while trimmed and trimmed[-1] == 0:
                trimmed.pop()
            object.__setattr__(self, "t", tuple(trimmed))

    @property
    def n(self) -> int:
        return sum(self.t)

    @property
    def q(self) -> int:
        """Last transmitted bit index (0 for the empty pattern)."""
        return len(self.t)

    def count(self, k: int) -> int:
        """Repetitions of bit k (1-based); 0 beyond the stored depth."""
        if k < 1:
            raise ValidationError("bit index must be >= 1")
        return self.t[k - 1] if k <= len(self.t) else 0

    def bumped(self, k: int) -> "TransmissionPattern":
        """Copy with one extra use of bit k (1-based)."""
        t = list(self.t) + [0] * max(0, k - len(self.t))
        t[k - 1] += 1
        return TransmissionPattern(tuple(t))

    def __str__(self) -> str:
        return ",".join(str(x) for x in self.t)


def pattern(counts: Sequence[int]) -> TransmissionPattern:
    return TransmissionPattern(tuple(int(x) for x in counts))


def parse_pattern(text: str) -> TransmissionPattern:
    text = text.strip()
    if not text:
        return TransmissionPattern(())
    try:
        return pattern([int(x) for x in text.split(",")])
    except ValueError as exc:
        raise ValidationError(f"cannot parse pattern {text!r}: {exc}") from exc


def upper_bound(t: TransmissionPattern, C: float) -> float:
    """U(t): Chernoff upper bound on the distortion, tail in closed form.

    Summed term by term with positive terms only, so the result keeps full
    relative precision even when it underflows the prior scale (needed for
    the large-n rate sweeps).
    """
    if C < 0.0:
        raise ValidationError("C must be >= 0")
    q = t.q
    head = math.fsum(4.0 ** -(k + 1) * math.exp(-t.t[k] * C) for k in range(q))
    return head + 4.0**-q / 3.0


def lower_bound(t: TransmissionPattern, B: float) -> float:
    """L(t): lower bound driven by the mean absolute log-likelihood ratio."""
    if B < 0.0:
        raise ValidationError("B must be >= 0")
    q = t.q
    head = math.fsum(4.0 ** -(k + 1) * math.exp(-t.t[k] * B) for k in range(q))
    return 0.25 * (head + 4.0**-q / 3.0)


def pattern_count(n: int, max_depth: int) -> int:
    return math.comb(n + max_depth - 1, max_depth - 1)


def _compositions(n: int, depth: int) -> Iterator[tuple[int, ...]]:
    # Stars and bars; ascending bar positions give lexicographic order.
    total = n + depth - 1
    for bars in itertools.combinations(range(total), depth - 1):
        t = []
        prev = -1
        for b in bars:
            t.append(b - prev - 1)
            prev = b
        t.append(total - prev - 1)
        yield tuple(t)


def enumerate_patterns(n: int, max_depth: int) -> list[TransmissionPattern]:
    """All ways to split n uses over bits 1..max_depth, in lexicographic order."""
    if n < 0 or max_depth < 1:
        raise ValidationError("need n >= 0 and max_depth >= 1")
    count = pattern_count(n, max_depth)
    if count > PATTERN_BUDGET:
        raise BudgetExceededError(
            f"enumeration too large: {count} patterns exceeds the {PATTERN_BUDGET} budget"
        )
    return [TransmissionPattern(t) for t in _compositions(n, max_depth)]


def _greedy_fill(counts: list[int], units: int, C: float, max_depth: int | None) -> list[int]:
    # Cost key (k+1) ln4 + c C is the negative log of the U-decrease from
    # giving index k (0-based, at count c) one more use; the heap pops the
    # largest decrease, ties broken toward the smaller index. Fresh indices
    # are inserted lazily: index k+1 is never preferable to index k at equal
    # counts.
    counts = list(counts)
    heap = [((k + 1) * LN4 + c * C, k) for k, c in enumerate(counts)]
    if max_depth is None or len(counts) < max_depth:
        heap.append(((len(counts) + 1) * LN4, len(counts)))
    heapq.heapify(heap)
    for _ in range(units):
        key, k = heapq.heappop(heap)
        if k == len(counts):
            counts.append(0)
            if max_depth is None or len(counts) < max_depth:
                heapq.heappush(heap, ((len(counts) + 1) * LN4, len(counts)))
        counts[k] += 1
        heapq.heappush(heap, (key + C, k))
    return counts


def _exhaustive_argmin(n: int, C: float, max_depth: int) -> TransmissionPattern:
    count = pattern_count(n, max_depth)
    if count > PATTERN_BUDGET:
        raise BudgetExceededError(
            f"enumeration too large: {count} patterns exceeds the {PATTERN_BUDGET} budget"
        )
    weights = 4.0 ** -np.arange(1, max_depth + 1)
    best_val = math.inf
    best: tuple[int, ...] | None = None
    chunk = 65536
    gen = _compositions(n, max_depth)
    while True:
        block = list(itertools.islice(gen, chunk))
        if not block:
            break
        T = np.asarray(block, dtype=np.float64)
        # Fixed-depth evaluation: zero entries contribute their prior weight,
        # which together with the constant 4^-d/3 tail equals the trimmed form.
        vals = np.exp(-T * C) @ weights
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best = block[i]
    assert best is not None
    return TransmissionPattern(best)


def efficient_search(
    n: int,
    C: float,
    mode: str = "greedy",
    max_depth: int | None = None,
) -> TransmissionPattern:
    """Pattern minimizing U for budget n.

    ``greedy`` allocates the n uses one at a time to the index with the
    largest decrease of U (ties toward the smaller index); separable convexity
    makes this the exact integer minimum. ``exhaustive`` scans every
    composition of n into ``max_depth`` parts and is the independent
    cross-check route (refused above the pattern budget).
    """
    if n < 0:
        raise ValidationError("budget n must be >= 0")
    if C <= 0.0:
        raise ValidationError("efficient search needs C > 0")
    if mode == "greedy":
        return TransmissionPattern(tuple(_greedy_fill([], n, C, max_depth)))
    if mode == "exhaustive":
        if max_depth is None or max_depth < 1:
            raise ValidationError("exhaustive mode needs max_depth >= 1")
        return _exhaustive_argmin(n, C, max_depth)
    raise ValidationError(f"unknown search mode {mode!r}")


def aurelian(n: int, k: InfoConstants) -> TransmissionPattern:
    """Staircase policy: base allocation t_j = (q - j + 1) r, remainder greedy.

    q is the largest depth whose full staircase r q (q+1) / 2 fits in n,
    i.e. q = floor(sqrt(2n/r + 1/4) - 1/2); the leftover uses are distributed
    by the same largest-U-decrease rule as ``efficient_search``, which keeps
    the pattern non-increasing.
    """
    if k.r < 1:
        raise ValidationError(
            f"repetition unit r={k.r} (C > ln 4): the staircase policy is undefined"
        )
    if n < k.r:
        raise ValidationError(f"budget below one repetition unit: n={n} < r={k.r}")
    r = k.r
    q = int(math.floor(math.sqrt(2.0 * n / r + 0.25) - 0.5))
    # Guard the float sqrt against off-by-one at exact staircase budgets.
    while r * (q + 1) * (q + 2) // 2 <= n:
        q += 1
    while q > 1 and r * q * (q + 1) // 2 > n:
        q -= 1
    base = [(q - j) * r for j in range(q)]
    remainder = n - r * q * (q + 1) // 2
    return TransmissionPattern(tuple(_greedy_fill(base, remainder, k.C, None)))


@dataclass(frozen=True)
class EfficiencyReport:
    """Structural checks every exact U-minimizer must satisfy."""

    no_gap: bool
    spacing: bool
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.no_gap and self.spacing


def check_efficient_properties(t: TransmissionPattern, r_real: float) -> EfficiencyReport:
    """No-gap and pairwise spacing checks with the unfloored r_real = ln4 / C.

    Spacing requires (k2-k1) r_real - 1 <= t_{k1} - t_{k2} <= (k2-k1) r_real + 1
    for all transmitted pairs k1 < k2; both follow from single-move optimality
    of a U-minimizer.
    """
    violations: list[str] = []
    q = t.q
    no_gap = all(t.t[i] >= 1 for i in range(q))
    if not no_gap:
        violations.append("gap: some bit up to the last transmitted index has no uses")
    spacing = True
    for i in range(q):
        for j in range(i + 1, q):
            diff = t.t[i] - t.t[j]
            gap = (j - i) * r_real
            if not (gap - 1.0 - _CHECK_SLACK <= diff <= gap + 1.0 + _CHECK_SLACK):
                spacing = False
                violations.append(
                    f"spacing: t_{i + 1}-t_{j + 1}={diff} outside [{gap - 1.0:.6g}, {gap + 1.0:.6g}]"
                )
    return EfficiencyReport(no_gap=no_gap, spacing=spacing, violations=tuple(violations))


@dataclass(frozen=True)
class DepthBoundsReport:
    """Depth and top-count bounds implied by the structural properties."""

    t1_bound: bool
    q_bound: bool

    @property
    def ok(self) -> bool:
        return self.t1_bound and self.q_bound


def depth_bounds(t: TransmissionPattern, r: int) -> DepthBoundsReport:
    """Checks t_1 <= q (r + 1) and q <= sqrt(2n + 1/2) - 1/4."""
    q = t.q
    t1 = t.t[0] if t.t else 0
    t1_ok = t1 <= q * (r + 1) + _CHECK_SLACK
    q_ok = q <= math.sqrt(2.0 * t.n + 0.5) - 0.25 + _CHECK_SLACK
    return DepthBoundsReport(t1_bound=bool(t1_ok), q_bound=bool(q_ok))
