"""Robust loss functions with a flat saturation region.

Two families are provided, both symmetric, nondecreasing in |a|, and exactly
flat beyond the clipping point tau:

* ``tukey``   -- the Tukey bisquare loss
                 M(a) = scale * (tau^2/6) * (1 - [1 - (a/tau)^2]^3) for |a| <= tau,
                 and scale * tau^2/6 beyond.  Quadratic growth (p = 2).
* ``clipped`` -- the clipped power loss M(a) = scale * min(|a|^p, tau^p), p >= 1.

On (0, tau] each loss is sandwiched between two multiples of |a|^p; the
measured sandwich constants drive the oversampling formulas elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DomainError, ParameterError, ShapeError

TUKEY = "tukey"
CLIPPED = "clipped"

SANDWICH_GRID = 10_000
IRLS_RESIDUAL_FLOOR = 1e-12


def _as_float_array(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class LossSpec:
    """A flat-beyond-tau loss: kind, clipping point, growth exponent, scale."""

    kind: str
    tau: float
    p: float = 2.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in (TUKEY, CLIPPED):
            raise ParameterError(f"unknown loss kind {self.kind!r}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ParameterError("tau must be a positive finite number")
        if not (np.isfinite(self.p) and self.p >= 1):
            raise ParameterError("growth exponent p must satisfy p >= 1")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ParameterError("scale must be a positive finite number")
        if self.kind == TUKEY and self.p != 2.0:
            raise ParameterError("the bisquare loss has growth exponent 2")

    # -- evaluation ---------------------------------------------------------

    def value(self, a):
        """M(a), elementwise for arrays; scalar in -> scalar out."""
        arr = _as_float_array(a, "a")
        if self.kind == TUKEY:
            u = np.minimum((arr / self.tau) ** 2, 1.0)
            out = self.scale * (self.tau**2 / 6.0) * (1.0 - (1.0 - u) ** 3)
        else:
            out = self.scale * np.minimum(
                np.abs(arr) ** self.p, self.tau**self.p
            )
        return float(out) if np.isscalar(a) or np.ndim(a) == 0 else out

    def total(self, y, w=None) -> float:
        """Weighted sum of losses: sum_i w_i * M(y_i).  w defaults to ones."""
        yv = np.atleast_1d(_as_float_array(y, "y"))
        if w is None:
            return float(np.sum(self.value(yv)))
        wv = np.atleast_1d(_as_float_array(w, "w"))
        if wv.shape != yv.shape:
            raise ShapeError("w and y must have the same length")
        if np.any(wv < 0):
            raise DomainError("weights must be nonnegative")
        return float(np.sum(wv * self.value(yv)))

    @property
    def flat_value(self) -> float:
        """The constant value taken for |a| >= tau."""
        if self.kind == TUKEY:
            return self.scale * self.tau**2 / 6.0
        return self.scale * self.tau**self.p

    # -- IRLS ----------------------------------------------------------------

    def irls_weight(self, r):
        """Quadratic-surrogate weight M'(r)/(2r), extended continuously at 0.

        Zero in the flat region.  For the clipped loss with p < 2 the residual
        magnitude is floored at 1e-12 to keep the weight finite.
        """
        arr = np.atleast_1d(_as_float_array(r, "r"))
        aa = np.abs(arr)
        inside = aa <= self.tau
        if self.kind == TUKEY:
            out = np.where(
                inside, 0.5 * self.scale * (1.0 - (arr / self.tau) ** 2) ** 2, 0.0
            )
        else:
            floored = np.maximum(aa, IRLS_RESIDUAL_FLOOR)
            out = np.where(
                inside, 0.5 * self.scale * self.p * floored ** (self.p - 2.0), 0.0
            )
        return float(out[0]) if np.isscalar(r) or np.ndim(r) == 0 else out

    # -- heavy/light split ----------------------------------------------------

    def split_heavy_light(self, y):
        """Indices with |y_i| > tau (heavy, strict) and the complement (light)."""
        yv = np.atleast_1d(_as_float_array(y, "y"))
        heavy = np.abs(yv) > self.tau
        return np.flatnonzero(heavy), np.flatnonzero(~heavy)

    # -- growth sandwich -------------------------------------------------------

    @cached_property
    def _sandwich(self) -> tuple[float, float]:
        a = self.tau * np.arange(1, SANDWICH_GRID + 1) / SANDWICH_GRID
        ratio = self.value(a) / a**self.p
        return float(ratio.min()), float(ratio.max())

    def sandwich_bounds(self) -> tuple[float, float]:
        """Measured (min, max) of M(a)/|a|^p over a 10^4-point grid on (0, tau]."""
        return self._sandwich

    @property
    def power_lower(self) -> float:
        """Lower sandwich constant, clamped into (0, 1]."""
        return min(1.0, self._sandwich[0])

    @property
    def power_upper(self) -> float:
        """Upper sandwich constant, clamped into [1, inf)."""
        return max(1.0, self._sandwich[1])

    @property
    def sandwich_ratio(self) -> float:
        """power_upper / power_lower; >= 1, equals the growth-distortion factor."""
        return self.power_upper / self.power_lower
