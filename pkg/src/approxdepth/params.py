"""Balancing the primal cell size against the dual resolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import ParameterError

DUAL_ONLY = "dual-only"
BALANCED = "balanced"
PRIMAL_ONLY = "primal-only"


@dataclass(frozen=True)
class Params:
    delta1: float
    delta2: float
    regime: str
    epsilon: float
    m: int
    n: int = 0
    raw_delta1: float = float("nan")
    raw_delta2: float = float("nan")
    tune_factor: float = 1.0


def check_epsilon(eps):
    eps = float(eps)
    if not (0.0 < eps <= 1.0) or math.isnan(eps):
        raise ParameterError(f"epsilon must lie in (0, 1], got {eps!r}")
    return eps


def _check_counts(n, m):
    if n < 0:
        raise ParameterError(f"object count must be >= 0, got {n}")
    if m < 1:
        raise ParameterError(f"query count must be >= 1, got {m}")


def pow2_round(x):
    """Nearest power of two in log scale."""
    return 2.0 ** round(math.log2(x))


def _finish(raw1, n, m, eps, lo_thr, hi_thr, tune):
    """Shared regime logic; ``raw1`` is the unrounded primal cell size."""
    floor1 = 2.0 ** math.ceil(math.log2(eps) - 1e-12)
    raw2 = eps / raw1 if raw1 > 0 else float("inf")
    if m <= lo_thr:
        return Params(1.0, eps, DUAL_ONLY, eps, m, n, raw1, raw2, tune)
    if m >= hi_thr:
        return Params(eps, 1.0, PRIMAL_ONLY, eps, m, n, raw1, raw2, tune)
    d1 = min(1.0, max(floor1, pow2_round(raw1 * tune)))
    return Params(d1, eps / d1, BALANCED, eps, m, n, raw1, raw2, tune)


def choose_parameters(n, m, eps, tune_factor=1.0):
    """Planar halfplanes: delta1 = sqrt(n eps / m), delta2 = eps / delta1."""
    eps = check_epsilon(eps)
    _check_counts(n, m)
    raw1 = math.sqrt(n * eps / m)
    return _finish(raw1, n, m, eps, n * eps, n / eps, tune_factor)


def choose_parameters_d(n, m, eps, d, tune_factor=1.0):
    """Halfspaces in R^d: delta1 = (n/m)^(1/(2(d-1))) sqrt(eps)."""
    eps = check_epsilon(eps)
    _check_counts(n, m)
    if int(d) != d or d < 2:
        raise ParameterError(f"dimension must be an integer >= 2, got {d!r}")
    raw1 = (n / m) ** (1.0 / (2 * (d - 1))) * math.sqrt(eps)
    return _finish(raw1, n, m, eps, n * eps ** (d - 1), n / eps ** (d - 1), tune_factor)


def choose_parameters_simplex3(n, m, eps, tune_factor=1.0):
    """Simplices in R^3: delta2 = (m eps^2 / n)^(1/5), delta1 = eps / delta2."""
    eps = check_epsilon(eps)
    _check_counts(n, m)
    raw2 = (m * eps ** 2 / n) ** 0.2 if n > 0 else float("inf")
    raw1 = eps / raw2
    return _finish(raw1, n, m, eps, n * eps ** 3, n / eps ** 2, tune_factor)


def depth_for(side, delta):
    """Smallest k with side / 2^k <= delta."""
    return max(0, math.ceil(math.log2(side / delta) - 1e-12))


# cells a build may touch: objects * d * 2^(k(d-1)); keeps desk-scale memory bounded
WORK_BUDGET = 2e8


def clamp_depth(k, n_obj, d, budget=WORK_BUDGET):
    """Largest depth <= k whose estimated primal work fits the budget."""
    while k > 0 and n_obj * d * 2.0 ** (k * (d - 1)) > budget:
        k -= 1
    return k


def coarsened(p: Params, levels):
    """``p`` with the primal cell ``levels`` times doubled and delta2 shrunk to match."""
    if levels <= 0:
        return p
    d1 = min(1.0, p.delta1 * 2.0 ** levels)
    return replace(p, delta1=d1, delta2=p.epsilon / d1)
