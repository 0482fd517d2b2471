"""Gray-level histogram, 7-bit quantisation and first-order texture statistics.

The feature vector produced by :func:`extract_features` is laid out as::

    q_0 ... q_{G-1}, variance, skewness, entropy, smoothness

with ``G = 2**quant_bits`` (128 by default, so 132 values in total).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ParameterError
from .imagecore import GrayImage

LEVELS = 256
DEFAULT_QUANT_BITS = 7
DEFAULT_LOG_BASE = 10.0
N_TEXTURE = 4
N_FEATURES = 2**DEFAULT_QUANT_BITS + N_TEXTURE

_GRAY = np.arange(LEVELS, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Histogram:
    counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (LEVELS,):
            raise ValueError(f"histogram needs {LEVELS} bins, got {counts.shape}")
        if counts.min() < 0 or int(counts.sum()) != self.total or self.total <= 0:
            raise ValueError("counts must be non-negative and sum to a positive total")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        probs = counts / float(self.total)
        probs.setflags(write=False)
        object.__setattr__(self, "_probs", probs)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @classmethod
    def from_probs(cls, probs, total: int = 2**40) -> "Histogram":
        """Build a histogram approximating ``probs`` (handy for synthetic distributions).

        Counts are ``probs * total`` rounded; ``total`` is adjusted so that the
        invariants hold exactly.  Dyadic probabilities are reproduced exactly.
        """
        p = np.asarray(probs, dtype=np.float64)
        counts = np.rint(p * total).astype(np.int64)
        return cls(counts, int(counts.sum()))


@dataclass(frozen=True, eq=False)
class QuantizedHistogram:
    probs: np.ndarray

    @property
    def levels(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class TextureFeatures:
    mean: float
    variance: float
    skewness: float
    entropy: float
    smoothness: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.variance, self.skewness, self.entropy, self.smoothness)


def histogram(img: GrayImage) -> Histogram:
    px = img.pixels.ravel()
    if px.size == 0:
        raise EmptyInputError("cannot build a histogram of an empty image")
    counts = np.bincount(px, minlength=LEVELS)
    return Histogram(counts, int(px.size))


def quantize(h: Histogram, m: int = DEFAULT_QUANT_BITS) -> QuantizedHistogram:
    """Merge the 256 levels into ``2**m`` equal-width bins.

    Bin ``j`` collects levels ``i`` with ``i // (256 / 2**m) == j``.
    """
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= 8:
        raise ParameterError(f"quantisation bits must be an integer in [1, 8], got {m!r}")
    bins = 2**m
    probs = h.counts.reshape(bins, LEVELS // bins).sum(axis=1) / float(h.total)
    return QuantizedHistogram(probs)


def mean_intensity(h: Histogram) -> float:
    return float(np.dot(_GRAY, h.probs))


def _central_moment(h: Histogram, order: int, mu: float | None = None) -> float:
    if mu is None:
        mu = mean_intensity(h)
    return float(np.dot((_GRAY - mu) ** order, h.probs))


def variance(h: Histogram) -> float:
    return _central_moment(h, 2)


def skewness(h: Histogram) -> float:
    """Third standardised moment; 0 for a flat (zero-variance) histogram."""
    mu = mean_intensity(h)
    var = _central_moment(h, 2, mu)
    if var <= 0.0:
        return 0.0
    return _central_moment(h, 3, mu) / var**1.5


def entropy(h: Histogram, base: float = DEFAULT_LOG_BASE) -> float:
    if base <= 0 or base == 1:
        raise ParameterError(f"invalid logarithm base {base}")
    p = h.probs[h.probs > 0]
    if p.size == 1:
        return 0.0
    return float(-np.dot(p, np.log(p)) / math.log(base))


def smoothness(var: float) -> float:
    """Relative smoothness ``1 - 1 / (1 + var)``."""
    if not var >= 0:
        raise ParameterError(f"variance must be non-negative, got {var}")
    return 1.0 - 1.0 / (1.0 + var)


def texture_features(h: Histogram, log_base: float = DEFAULT_LOG_BASE) -> TextureFeatures:
    mu = mean_intensity(h)
    var = _central_moment(h, 2, mu)
    skew = 0.0 if var <= 0.0 else _central_moment(h, 3, mu) / var**1.5
    return TextureFeatures(
        mean=mu,
        variance=var,
        skewness=skew,
        entropy=entropy(h, log_base),
        smoothness=smoothness(var),
    )


def extract_features(
    img: GrayImage, quant_bits: int = DEFAULT_QUANT_BITS, log_base: float = DEFAULT_LOG_BASE
) -> np.ndarray:
    """Feature vector of an (already thresholded) grayscale image."""
    h = histogram(img)
    q = quantize(h, quant_bits)
    tex = texture_features(h, log_base)
    return np.concatenate([q.probs, np.array(tex.as_tuple(), dtype=np.float64)])


def feature_names(quant_bits: int = DEFAULT_QUANT_BITS) -> list[str]:
    return [f"f{i:03d}" for i in range(2**quant_bits + N_TEXTURE)]
