"""Per-feature min-max scaling into ``[lower, upper]`` (0.1 and 0.9 by default)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ShapeError

LOWER = 0.1
UPPER = 0.9


@dataclass(frozen=True, eq=False)
class ScalerParams:
    minimum: np.ndarray
    maximum: np.ndarray
    lower: float = LOWER
    upper: float = UPPER

    def __post_init__(self):
        lo = np.array(self.minimum, dtype=np.float64)
        hi = np.array(self.maximum, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ShapeError(f"min/max must be 1-D of equal length, got {lo.shape} and {hi.shape}")
        if np.any(lo > hi):
            raise ValueError("every per-feature minimum must not exceed its maximum")
        if not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    @property
    def n_features(self) -> int:
        return len(self.minimum)

    def __eq__(self, other):
        if not isinstance(other, ScalerParams):
            return NotImplemented
        return (
            np.array_equal(self.minimum, other.minimum)
            and np.array_equal(self.maximum, other.maximum)
            and self.lower == other.lower
            and self.upper == other.upper
        )

    __hash__ = None


def fit(vectors, lower: float = LOWER, upper: float = UPPER) -> ScalerParams:
    """Componentwise extrema of the training vectors."""
    vectors = list(vectors) if not isinstance(vectors, np.ndarray) else vectors
    if len(vectors) == 0:
        raise EmptyInputError("cannot fit a scaler on zero vectors")
    lengths = {len(v) for v in vectors}
    if len(lengths) != 1:
        raise ShapeError(f"ragged feature vectors: lengths {sorted(lengths)}")
    data = np.asarray(vectors, dtype=np.float64)
    return ScalerParams(data.min(axis=0), data.max(axis=0), lower, upper)


def apply(params: ScalerParams, v) -> np.ndarray:
    """Scale one vector, or each row of a 2-D array.

    Degenerate features (min == max) map to the midpoint of the target range.
    Values outside the fitted range are clamped.
    """
    x = np.asarray(v, dtype=np.float64)
    if x.shape[-1:] != (params.n_features,):
        raise ShapeError(f"expected {params.n_features} features, got shape {x.shape}")
    lo, hi = params.minimum, params.maximum
    span = hi - lo
    flat = span == 0
    safe = np.where(flat, 1.0, span)
    out = (x - lo) / safe * (params.upper - params.lower) + params.lower
    out = np.where(flat, (params.upper + params.lower) / 2.0, out)
    return np.clip(out, params.lower, params.upper)
