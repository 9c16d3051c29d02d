"""Canonical representations of probability measures on the line.

Two equivalent views are used throughout the package: a right-continuous
step CDF (a nondecreasing function with limits 0 and 1), and the sorted
equal-mass particle system obtained by sampling its generalized inverse at
the midpoint quantile nodes w_i = (i - 1/2)/N.  Conversion between the two
is exact, including atoms of arbitrary multiplicity.

All types are immutable after construction and every operation is a pure
function, so values can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "StepCdf",
    "ParticleQuantiles",
    "MixtureState",
    "generalized_inverse",
    "cdf_from_particles",
    "particles_from_cdf",
    "eval_cdf",
    "moment",
    "tail_moment",
    "mixture_quantile",
    "midpoint_nodes",
    "as_step_cdf",
]


def _frozen_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d array, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def midpoint_nodes(n: int) -> np.ndarray:
    """Quantile nodes w_i = (i - 1/2)/n for i = 1..n."""
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    return (np.arange(n) + 0.5) / n


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step CDF with finitely many jumps.

    ``values[k]`` is the CDF value on ``[breakpoints[k], breakpoints[k+1])``;
    the function is 0 left of the first breakpoint and the last value must
    be exactly 1.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = _frozen_array(self.breakpoints)
        vals = _frozen_array(self.values)
        if bp.size < 1:
            raise ValueError("a StepCdf needs at least one breakpoint")
        if bp.size != vals.size:
            raise ValueError(
                f"breakpoints and values disagree in length ({bp.size} vs {vals.size})"
            )
        if not np.all(np.isfinite(bp)):
            raise ValueError("breakpoints must be finite")
        if bp.size > 1 and not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly ascending")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("values must lie in [0, 1]")
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValueError("values must be nondecreasing")
        if vals[-1] != 1.0:
            raise ValueError(f"last value must be exactly 1, got {vals[-1]!r}")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def __call__(self, x):
        return eval_cdf(self, x)


@dataclass(frozen=True)
class ParticleQuantiles:
    """Sorted equal-mass particle positions; particle i carries mass 1/N
    and sits at quantile node (i - 1/2)/N."""

    positions: np.ndarray

    def __post_init__(self):
        pos = _frozen_array(self.positions)
        if pos.size < 1:
            raise ValueError("need at least one particle")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if pos.size > 1 and np.any(np.diff(pos) < 0):
            raise ValueError("positions must be nondecreasing")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.size

    @property
    def nodes(self) -> np.ndarray:
        return midpoint_nodes(self.n)


@dataclass(frozen=True)
class MixtureState:
    """Convex combination (1-s)*F_low + s*F_high of two equal-size particle
    systems, evaluated as a CDF."""

    low: ParticleQuantiles
    high: ParticleQuantiles
    s: float

    def __post_init__(self):
        if not isinstance(self.low, ParticleQuantiles) or not isinstance(
            self.high, ParticleQuantiles
        ):
            raise TypeError("low and high must be ParticleQuantiles")
        if self.low.n != self.high.n:
            raise ValueError(
                f"mixture components must have equal size ({self.low.n} vs {self.high.n})"
            )
        s = float(self.s)
        if not (0.0 <= s < 1.0):
            raise ValueError(f"interpolation weight must satisfy 0 <= s < 1, got {s}")
        object.__setattr__(self, "s", s)

    def __call__(self, x):
        return eval_cdf(self, x)


def _check_quantile_arg(w) -> np.ndarray:
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr <= 0.0) or np.any(w_arr >= 1.0):
        raise ValueError(f"quantile argument must lie strictly in (0, 1), got {w}")
    return w_arr


def generalized_inverse(cdf: StepCdf, w):
    """Generalized inverse inf{x : F(x) > w} for w in (0, 1).

    Scalar in, scalar out; arrays are mapped elementwise.
    """
    w_arr = _check_quantile_arg(w)
    # first index with value strictly above w
    idx = np.searchsorted(cdf.values, w_arr, side="right")
    out = cdf.breakpoints[idx]
    return float(out) if np.isscalar(w) or w_arr.ndim == 0 else out


def cdf_from_particles(pq: ParticleQuantiles) -> StepCdf:
    """Step CDF of the particle law: jump of multiplicity/N at each distinct
    position.  Exact inverse of particles_from_cdf on midpoint nodes."""
    uniq, counts = np.unique(pq.positions, return_counts=True)
    vals = np.cumsum(counts) / pq.n
    vals[-1] = 1.0
    return StepCdf(uniq, vals)


def particles_from_cdf(cdf: StepCdf, n: int) -> ParticleQuantiles:
    """Sample the generalized inverse at the n midpoint nodes."""
    pos = generalized_inverse(cdf, midpoint_nodes(n))
    return ParticleQuantiles(pos)


def eval_cdf(obj, x):
    """Right-continuous CDF evaluation of a StepCdf or MixtureState."""
    x_arr = np.asarray(x, dtype=float)
    if isinstance(obj, MixtureState):
        f_low = _particle_cdf_eval(obj.low, x_arr)
        f_high = _particle_cdf_eval(obj.high, x_arr)
        out = (1.0 - obj.s) * f_low + obj.s * f_high
    elif isinstance(obj, StepCdf):
        idx = np.searchsorted(obj.breakpoints, x_arr, side="right")
        out = np.where(idx > 0, obj.values[np.maximum(idx - 1, 0)], 0.0)
    else:
        raise TypeError(f"cannot evaluate {type(obj).__name__} as a CDF")
    return float(out) if np.isscalar(x) or x_arr.ndim == 0 else out


def _particle_cdf_eval(pq: ParticleQuantiles, x: np.ndarray) -> np.ndarray:
    return np.searchsorted(pq.positions, x, side="right") / pq.n


def moment(pq: ParticleQuantiles, p: float) -> float:
    """p-th absolute moment (1/N) sum |x_i|^p, p >= 1."""
    if p < 1:
        raise ValueError(f"moment order must satisfy p >= 1, got {p}")
    return float(np.mean(np.abs(pq.positions) ** p))


def tail_moment(pq: ParticleQuantiles, p: float, r: float) -> float:
    """Tail moment (1/N) sum_{|x_i| >= r} |x_i|^p; equals moment at r = 0."""
    if p < 1:
        raise ValueError(f"moment order must satisfy p >= 1, got {p}")
    if r < 0:
        raise ValueError(f"tail radius must be nonnegative, got {r}")
    absx = np.abs(pq.positions)
    return float(np.sum(np.where(absx >= r, absx**p, 0.0)) / pq.n)


def as_step_cdf(obj) -> StepCdf:
    """Exact StepCdf view of a particle system or mixture state."""
    if isinstance(obj, StepCdf):
        return obj
    if isinstance(obj, ParticleQuantiles):
        return cdf_from_particles(obj)
    if isinstance(obj, MixtureState):
        merged = np.unique(np.concatenate([obj.low.positions, obj.high.positions]))
        vals = (1.0 - obj.s) * _particle_cdf_eval(obj.low, merged) + obj.s * _particle_cdf_eval(
            obj.high, merged
        )
        vals = np.maximum.accumulate(vals)
        vals[-1] = 1.0
        return StepCdf(merged, vals)
    raise TypeError(f"cannot view {type(obj).__name__} as a StepCdf")


def mixture_quantile(ms: MixtureState, w):
    """Generalized inverse of the mixture CDF, computed exactly on the merged
    step structure of the two particle sets."""
    return generalized_inverse(as_step_cdf(ms), w)
