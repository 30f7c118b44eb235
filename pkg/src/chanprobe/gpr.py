"""Noise-free Gaussian-process posterior over short per-channel histories.

The model is a zero-mean GP with a squared-exponential kernel over round
indices.  Given observations (tau_1, y_1) .. (tau_m, y_m) and a query round t,
the posterior load estimate is

    mean(t) = k(t)' K^-1 y        var(t) = k(t, t) - k(t)' K^-1 k(t)

where K is the Gram matrix of the observation rounds and k(t) the vector of
kernel values against the query.  Histories are short (at most the smoothing
window length), so the solver is a direct Cholesky factor-and-solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: round-off floor: posterior variances in (-VARIANCE_EPS, 0) clamp to 0,
#: anything more negative means the factorization went bad
VARIANCE_EPS = 1e-9


class DegeneracyError(ArithmeticError):
    """The Gram matrix lost positive definiteness (names the failing pivot)."""


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel parameters.

    lengthscale is in round units; consecutive rounds correlate at
    exp(-1/(2*lengthscale^2)), about 0.61 at the default.  jitter is added to
    the Gram diagonal purely for factorization stability.
    """

    lengthscale: float = 1.0
    jitter: float = 1e-8

    def __post_init__(self):
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if not 0 < self.jitter < 1e-3:
            raise ValueError(f"jitter must be in (0, 1e-3), got {self.jitter}")


@dataclass(frozen=True)
class Posterior:
    """GP estimate of one channel's load at a query round.

    ``mean`` is the raw posterior mean; it can leave [0, 1] because the prior
    mean is zero.  Selection logic uses ``clamped_mean``.
    """

    mean: float
    variance: float

    @property
    def clamped_mean(self) -> float:
        return min(max(self.mean, 0.0), 1.0)


#: prior returned for channels with no history yet
PRIOR = Posterior(mean=0.0, variance=1.0)


def kernel(a: float, b: float, params: KernelParams = KernelParams()) -> float:
    """Squared-exponential correlation between rounds ``a`` and ``b``."""
    d = (a - b) / params.lengthscale
    return math.exp(-0.5 * d * d)


def gram(times: Sequence[float], params: KernelParams = KernelParams()) -> np.ndarray:
    """Gram matrix of observation rounds, jittered on the diagonal.

    ``times`` must be non-empty and strictly increasing.
    """
    if len(times) == 0:
        raise ValueError("gram requires at least one timestamp")
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise ValueError("times must be one-dimensional")
    if np.any(np.diff(t) <= 0):
        raise ValueError(f"timestamps must be strictly increasing, got {list(times)}")
    d = (t[:, None] - t[None, :]) / params.lengthscale
    m = np.exp(-0.5 * d * d)
    m[np.diag_indices_from(m)] += params.jitter
    return m


def _cholesky(m: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises DegeneracyError on a non-positive pivot."""
    n = m.shape[0]
    lower = np.zeros_like(m)
    for i in range(n):
        pivot = m[i, i] - lower[i, :i] @ lower[i, :i]
        if pivot <= 0.0:
            raise DegeneracyError(f"non-positive pivot at index {i}: {pivot:.3e}")
        lower[i, i] = math.sqrt(pivot)
        if i + 1 < n:
            lower[i + 1 :, i] = (m[i + 1 :, i] - lower[i + 1 :, :i] @ lower[i, :i]) / lower[i, i]
    return lower


def solve_spd(m: np.ndarray, rhs: Sequence[float]) -> np.ndarray:
    """Solve m @ x = rhs for symmetric positive definite ``m``.

    Cholesky factor-and-solve; never forms the inverse.  The matrices here
    are at most window-length square, so no blocking or pivoting games.
    """
    m = np.asarray(m, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if b.shape != (m.shape[0],):
        raise ValueError(f"rhs length {b.shape} does not match matrix size {m.shape[0]}")
    lower = _cholesky(m)
    n = m.shape[0]
    y = np.zeros(n)
    for i in range(n):
        y[i] = (b[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - lower[i + 1 :, i] @ x[i + 1 :]) / lower[i, i]
    return x


def posterior(
    history: Sequence[tuple[float, float]],
    query: float,
    params: KernelParams = KernelParams(),
) -> Posterior:
    """Posterior load estimate at ``query`` given (round, load) ``history``.

    The query must not precede any observation round.  An empty history
    returns the prior (mean 0, variance 1).  Small negative variances from
    round-off are clamped to 0.
    """
    if not history:
        return PRIOR
    times = [h[0] for h in history]
    values = [h[1] for h in history]
    if query < max(times):
        raise ValueError(
            f"query round {query} precedes an observation at round {max(times)}"
        )
    k_mat = gram(times, params)
    k_vec = np.array([kernel(t, query, params) for t in times])
    mean = float(k_vec @ solve_spd(k_mat, values))
    var = 1.0 - float(k_vec @ solve_spd(k_mat, k_vec))
    if var < 0.0:
        if var < -VARIANCE_EPS:
            raise DegeneracyError(f"posterior variance {var:.3e} below round-off floor")
        var = 0.0
    return Posterior(mean=mean, variance=var)
