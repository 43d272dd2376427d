"""Sample-compression generalization bound and its confidence schedule.

``q_bound`` evaluates, for an (alpha, m)-compression of an n-point sample,

    Q = n/(n-m) * alpha
        + c_linear * (m ln n + ln(1/delta)) / (n - m)
        + sqrt( c_sqrt * ( (n m / (n-m)) alpha ln n + ln(1/delta) ) / (n - m) )

which is monotone nondecreasing in alpha and in m and always at least alpha.
The constants multiplying the penalty terms are not pinned by theory here;
(2, 2) is the default and both are exposed so experiments can vary them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundParams",
    "BoundInput",
    "q_bound",
    "q_value",
    "delta_schedule",
    "property3_gap",
]


@dataclass(frozen=True)
class BoundParams:
    c_linear: float = 2.0
    c_sqrt: float = 2.0

    def __post_init__(self):
        if not (self.c_linear > 0 and self.c_sqrt > 0):
            raise ValueError("bound constants must be positive")


DEFAULT_PARAMS = BoundParams()


@dataclass(frozen=True)
class BoundInput:
    n: int
    alpha: float
    m: int
    delta: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sample size must be at least 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"empirical error {self.alpha} outside [0, 1]")
        if self.m < 0:
            raise ValueError("compression size must be non-negative")
        if self.m >= self.n:
            raise ValueError(
                f"bound undefined for compression size {self.m} >= sample size {self.n}"
            )
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"confidence {self.delta} outside (0, 1)")


def q_bound(inp: BoundInput, params: BoundParams = DEFAULT_PARAMS) -> float:
    n, alpha, m, delta = inp.n, inp.alpha, inp.m, inp.delta
    rem = n - m
    log_n = math.log(n)
    log_inv_delta = math.log(1.0 / delta)
    linear = params.c_linear * (m * log_n + log_inv_delta) / rem
    inside = params.c_sqrt * ((n * m / rem) * alpha * log_n + log_inv_delta) / rem
    return (n / rem) * alpha + linear + math.sqrt(inside)


def q_value(
    n: int, alpha: float, m: int, delta: float, params: BoundParams = DEFAULT_PARAMS
) -> float:
    """Convenience wrapper around :func:`q_bound`."""
    return q_bound(BoundInput(n=n, alpha=alpha, m=m, delta=delta), params)


def delta_schedule(n: int) -> float:
    """Summable confidence schedule ``min(1/2, n**-2)``."""
    if n < 1:
        raise ValueError("sample size must be at least 1")
    return min(0.5, float(n) ** -2)


def property3_gap(n: int, m: int, params: BoundParams = DEFAULT_PARAMS) -> float:
    """``max_alpha Q(n, alpha, 2m, delta_schedule(n)) - alpha`` on a 1001-point grid.

    The doubling of m mirrors how the learner charges a net of size kappa as
    a 2*kappa compression. Q is concave-monotone in alpha for this formula,
    so the grid sup is within a negligible sliver of the true sup.
    """
    if 2 * m >= n:
        raise ValueError("need 2*m < n")
    delta = delta_schedule(n)
    rem = n - 2 * m
    log_n = math.log(n)
    log_inv_delta = math.log(1.0 / delta)
    alphas = np.linspace(0.0, 1.0, 1001)
    linear = params.c_linear * (2 * m * log_n + log_inv_delta) / rem
    inside = params.c_sqrt * ((n * 2 * m / rem) * alphas * log_n + log_inv_delta) / rem
    q = (n / rem) * alphas + linear + np.sqrt(inside)
    return float(np.max(q - alphas))
