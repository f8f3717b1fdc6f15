"""Exact and log-space combinatorial kernels shared by every likelihood path.

Two arithmetic routes are kept deliberately separate: float64 (log or linear
space) for grid scans, and exact Python integers for published assignment
counts and for confirming suspected likelihood ties.  Python's built-in int
is the arbitrary-precision counter type throughout.
"""
from __future__ import annotations

import functools
import math
from typing import Iterable

import numpy as np

LOG_ZERO = float("-inf")

# Relative tolerance on log-likelihood values below which two candidates are
# treated as a suspected tie; suspected ties are confirmed exactly before
# being reported as ties.
LOG_TIE_RTOL = 1e-9

_log_fact = np.zeros(1)


def log_factorial_table(n: int) -> np.ndarray:
    """Array of ln(k!) for k = 0..n, grown once per session and shared read-only.

    Entry k is the cumulative sum of ln(1)..ln(k), so consecutive entries
    differ by ln(k) up to accumulation rounding.
    """
    global _log_fact
    if n < 0:
        raise ValueError("n must be non-negative")
    if n >= _log_fact.size:
        ks = np.arange(1, n + 1, dtype=np.float64)
        _log_fact = np.concatenate(([0.0], np.cumsum(np.log(ks))))
    return _log_fact[: n + 1]


def exact_binomial(n: int, k: int) -> int:
    """Exact binomial coefficient; out-of-range k gives 0."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k); returns -inf for out-of-range k so zero terms are uniform.

    Computed as the log of the exact coefficient (math.log accepts arbitrary
    precision integers), so accuracy is limited only by the final rounding.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if k < 0 or k > n:
        return LOG_ZERO
    if k == 0 or k == n:
        return 0.0
    return math.log(math.comb(n, k))


def log_sum_exp(terms: Iterable[float]) -> float:
    """ln sum(exp(t)); empty input or all -inf gives -inf."""
    arr = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms,
                     dtype=np.float64)
    if arr.size == 0:
        return LOG_ZERO
    m = float(np.max(arr))
    if m == LOG_ZERO:
        return LOG_ZERO
    return m + float(np.log(np.sum(np.exp(arr - m))))


@functools.lru_cache(maxsize=8)
def choose_table(n: int) -> np.ndarray:
    """(n+1, n+1) float64 table with entry [a, k] = C(a, k), zero when k > a.

    Each entry is the correctly rounded float of the exact coefficient, so
    the table is exact wherever coefficients stay below 2**53.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    table = np.zeros((n + 1, n + 1))
    for a in range(n + 1):
        value = 1
        table[a, 0] = 1.0
        for k in range(1, a + 1):
            value = value * (a - k + 1) // k
            table[a, k] = float(value)
    table.setflags(write=False)
    return table


def log_tie_cutoff(log_max: float) -> float:
    """Log-likelihood threshold below the maximum for suspected-tie candidates."""
    return log_max - LOG_TIE_RTOL * max(1.0, abs(log_max))
