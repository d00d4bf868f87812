"""Dyadic representation of messages in [0, 1] and prior transforms.

A message x in [0, 1] is identified with its base-2 expansion
x = sum_{k>=1} x_k 2^(-k). Dyadic rationals get the terminating expansion
(trailing zeros), so the bit sequence of a double is finite and exact.
Extraction is capped at depth 52 (the double mantissa); deeper bits are 0.

Non-uniform targets are handled by the CDF transform: locate F(X) instead of
X, where F is the strictly increasing CDF of the prior. The built-in
non-uniform family is the power prior F(x) = x^e on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError

BIT_DEPTH_CAP = 52

_GRID_POINTS = 10_000
_LIPSCHITZ_SLACK = 1e-9
_ROUNDTRIP_TOL = 1e-10


def _effective_value(value: float) -> float:
    # 1.0 has no terminating expansion; use the deepest representable point.
    if value >= 1.0:
        return 1.0 - 2.0 ** -BIT_DEPTH_CAP
    return value


@dataclass(frozen=True)
class Message:
    """A target value in [0, 1] with lazy access to its binary expansion."""

    value: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.value <= 1.0):
            raise ValidationError(f"message value {self.value!r} outside [0, 1]")

    def bits(self, depth: int) -> tuple[int, ...]:
        return tuple(bit_of(self, k) for k in range(1, depth + 1))


def bit_of(m: Message, k: int) -> int:
    """k-th coefficient (k >= 1) of the terminating binary expansion."""
    if k < 1:
        raise ValidationError("bit index must be >= 1")
    if k > BIT_DEPTH_CAP:
        return 0
    # Doubling a double in [0, 1) and subtracting off the integer part is
    # exact, so this walks the true expansion bit by bit.
    x = _effective_value(m.value)
    for _ in range(k - 1):
        x *= 2.0
        if x >= 1.0:
            x -= 1.0
    return 1 if 2.0 * x >= 1.0 else 0


def bits_array(values: np.ndarray, k: int) -> np.ndarray:
    """Vectorized k-th bit of each value (values in [0, 1))."""
    if k > BIT_DEPTH_CAP:
        return np.zeros(values.shape, dtype=np.int8)
    scaled = np.floor(values * float(2**k))
    return (scaled.astype(np.int64) & 1).astype(np.int8)


def quantize(m: Message, l: int) -> float:
    """Keep the first l bits: returns sum_{k<=l} x_k 2^(-k) <= value."""
    if l < 1:
        raise ValidationError("quantizer depth must be >= 1")
    bits = m.bits(min(l, BIT_DEPTH_CAP))
    return math.fsum(b * 2.0 ** -(k + 1) for k, b in enumerate(bits))


@dataclass(frozen=True)
class PriorSpec:
    """Prior on the target, given through its CDF and squared Lipschitz constant.

    The CDF maps the support [a, b] onto [0, 1] strictly increasingly; its
    squared Lipschitz constant bounds (F(u1)-F(u2))^2 <= lipschitz_sq (u1-u2)^2
    and is supplied rather than estimated (validated on a grid at
    construction). The callables must accept numpy arrays.
    """

    kind: str  # "uniform" | "transformed"
    cdf: Callable
    inverse_cdf: Callable
    support: tuple[float, float]
    lipschitz_sq: float

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "transformed"):
            raise ValidationError(f"unknown prior kind {self.kind!r}")
        if self.lipschitz_sq <= 0.0:
            raise ValidationError("lipschitz_sq must be positive")
        a, b = self.support
        if not a < b:
            raise ValidationError("empty prior support")
        u = np.linspace(a, b, _GRID_POINTS)
        F = np.asarray(self.cdf(u), dtype=float)
        if abs(F[0]) > 1e-12 or abs(F[-1] - 1.0) > 1e-12:
            raise ValidationError("cdf must map the support endpoints to 0 and 1")
        dF = np.diff(F)
        if np.any(dF <= 0.0):
            raise ValidationError("cdf must be strictly increasing on its support")
        # Adjacent-pair check implies the all-pairs bound by the triangle
        # inequality along the grid.
        du = np.diff(u)
        if np.any(dF * dF > self.lipschitz_sq * du * du * (1.0 + _LIPSCHITZ_SLACK)):
            raise ValidationError(
                "declared lipschitz_sq is violated on the validation grid"
            )
        back = np.asarray(self.inverse_cdf(F), dtype=float)
        if np.max(np.abs(back - u)) > _ROUNDTRIP_TOL * max(abs(a), abs(b), 1.0):
            raise ValidationError("inverse_cdf does not invert cdf to 1e-10")


def uniform_prior() -> PriorSpec:
    ident = lambda x: np.asarray(x, dtype=float)
    return PriorSpec(
        kind="uniform", cdf=ident, inverse_cdf=ident, support=(0.0, 1.0), lipschitz_sq=1.0
    )


def power_prior(exponent: float, lipschitz_sq: float | None = None) -> PriorSpec:
    """Prior on [0, 1] with CDF x^e (e >= 1); squared Lipschitz constant e^2.

    A declared ``lipschitz_sq`` overrides the derived e^2 and still has to
    survive the grid validation (so an understated constant is rejected).
    """
    if exponent < 1.0:
        raise ValidationError("power prior needs exponent >= 1 (else the CDF is not Lipschitz)")
    e = float(exponent)
    return PriorSpec(
        kind="transformed",
        cdf=lambda x: np.asarray(x, dtype=float) ** e,
        inverse_cdf=lambda u: np.asarray(u, dtype=float) ** (1.0 / e),
        support=(0.0, 1.0),
        lipschitz_sq=e * e if lipschitz_sq is None else float(lipschitz_sq),
    )


def to_uniform(prior: PriorSpec, x):
    """F(x): maps a prior sample into the uniform domain."""
    a, b = prior.support
    arr = np.asarray(x, dtype=float)
    if np.any(arr < a) or np.any(arr > b):
        raise ValidationError("value outside the prior support")
    out = prior.cdf(arr)
    return float(out) if np.ndim(x) == 0 else out


def from_uniform(prior: PriorSpec, u):
    """F^{-1}(u): maps a uniform-domain location back to the original domain."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError("uniform-domain value outside [0, 1]")
    out = prior.inverse_cdf(arr)
    return float(out) if np.ndim(u) == 0 else out


def load_prior(obj: dict) -> PriorSpec:
    """Prior from a config mapping: {"prior": "uniform"} or {"prior": "power", "exponent": e}."""
    if not isinstance(obj, dict):
        raise ValidationError("prior config must be a JSON object")
    kind = obj.get("prior")
    if kind == "uniform":
        return uniform_prior()
    if kind == "power":
        if "exponent" not in obj:
            raise ValidationError("power prior: missing field 'exponent'")
        declared = obj.get("lipschitz_sq")
        return power_prior(
            float(obj["exponent"]),
            lipschitz_sq=None if declared is None else float(declared),
        )
    raise ValidationError(f"unknown prior {kind!r}")
