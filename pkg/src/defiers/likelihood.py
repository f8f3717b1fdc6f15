"""Design-based likelihood of the joint distribution of potential outcomes.

The observed data arise from randomizing a fixed sample into two arms, so the
probability of the data given the type counts is a sum, over the feasible
numbers of always takers assigned to intervention, of products of four
binomial coefficients.  Both randomization designs share that sum; they differ
only by a factor that does not depend on the type counts.

Three routes to the same quantity are provided on purpose:

* exact integer sums (``exact_assignment_count``) for published counts and
  tie confirmation,
* float64 log values (``relative_log_likelihood`` / ``log_likelihood``) for
  single evaluations,
* a vectorized scan (``assignment_count_grid``) that fills the likelihood of
  every parameter vector at once by enumerating arm compositions instead of
  parameter vectors, and
* a brute-force oracle (``oracle_assignment_count``) that enumerates actual
  randomized assignments, used to check the other routes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import (
    Bernoulli,
    BudgetExceededError,
    Design,
    ExperimentData,
    Theta,
    check_design,
    theta_index,
)
from .combinatorics import LOG_ZERO, choose_table, log_binomial

# Above this sample size the assignment oracle would enumerate more than
# C(20, 10) = 184,756 subsets per call.
ORACLE_MAX_N = 20

# The full-grid scan materializes C(n+3, 3) float64 values (~310 MB at n=612,
# ~1.3 GB at the cap below).
GRID_MAX_N = 1000

SHARE_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PopulationShares:
    """Population shares of the four types, for the sampling-based contrast."""

    q_at: float
    q_co: float
    q_de: float
    q_nt: float

    def __post_init__(self) -> None:
        shares = self.counts()
        if any(q < 0.0 or q > 1.0 for q in shares):
            raise ValueError(f"shares must lie in [0,1], got {shares}")
        if abs(sum(shares) - 1.0) > SHARE_SUM_TOL:
            raise ValueError(f"shares must sum to 1, got {sum(shares)!r}")

    def counts(self) -> tuple[float, float, float, float]:
        return (self.q_at, self.q_co, self.q_de, self.q_nt)

    @property
    def takeup_intervention(self) -> float:
        return self.q_at + self.q_co

    @property
    def takeup_control(self) -> float:
        return self.q_at + self.q_de


def index_set(x: ExperimentData, theta: Theta) -> range:
    """Feasible counts of always takers assigned to intervention.

    The four arm-composition identities pin every composition count once this
    one is chosen; the range is empty when theta cannot produce x.
    """
    if x.n != theta.n:
        raise ValueError(f"data n={x.n} but theta n={theta.n}")
    lo = max(0, x.i1 - theta.co, theta.at - x.c1, theta.at + theta.de - x.i0 - x.c1)
    hi = min(
        theta.at,
        x.i1,
        theta.at + theta.de - x.c1,
        theta.at + theta.de + theta.nt - x.i0 - x.c1,
    )
    return range(lo, hi + 1)


def exact_assignment_count(theta: Theta, x: ExperimentData) -> int:
    """Number of intervention-arm subsets of theta's sample that yield x, exactly."""
    comb = math.comb
    at, co, de, nt = theta.counts()
    total = 0
    for i in index_set(x, theta):
        total += (
            comb(at, i)
            * comb(co, x.i1 - i)
            * comb(de, at + de - x.c1 - i)
            * comb(nt, x.i0 + x.c1 + i - at - de)
        )
    return total


def relative_log_likelihood(theta: Theta, x: ExperimentData) -> float:
    """Design-free log likelihood: ln of the assignment count.

    Equals the log likelihood under either design up to an additive constant
    that does not depend on theta; -inf when theta cannot produce x.
    """
    count = exact_assignment_count(theta, x)
    if count == 0:
        return LOG_ZERO
    return math.log(count)


def log_likelihood(theta: Theta, x: ExperimentData, design: Design) -> float:
    """ln P(X = x | theta) under the given randomization design."""
    if theta.n != x.n:
        raise ValueError(f"data n={x.n} but theta n={theta.n}")
    check_design(x, design)
    rel = relative_log_likelihood(theta, x)
    if rel == LOG_ZERO:
        return LOG_ZERO
    if isinstance(design, Bernoulli):
        p = design.p
        return rel + x.intervention_size * math.log(p) + x.control_size * math.log1p(-p)
    return rel - log_binomial(design.n, design.m)


def sampling_log_likelihood(
    q: PopulationShares, x: ExperimentData, design: Design
) -> float:
    """Log likelihood of population shares under IID sampling from a population.

    The shares enter only through the two marginal takeup probabilities, which
    is what makes this likelihood flat across population joint distributions
    with equal marginals, in contrast to the design-based likelihood.
    """
    check_design(x, design)
    p1, pc = q.takeup_intervention, q.takeup_control

    def xlogy(k: int, prob: float) -> float:
        if k == 0:
            return 0.0
        return k * math.log(prob) if prob > 0.0 else LOG_ZERO

    margin_terms = (
        xlogy(x.i1, p1)
        + xlogy(x.i0, 1.0 - p1)
        + xlogy(x.c1, pc)
        + xlogy(x.c0, 1.0 - pc)
    )
    if margin_terms == LOG_ZERO:
        return LOG_ZERO
    if isinstance(design, Bernoulli):
        p = design.p
        coef = (
            math.lgamma(x.n + 1)
            - math.lgamma(x.i1 + 1)
            - math.lgamma(x.i0 + 1)
            - math.lgamma(x.c1 + 1)
            - math.lgamma(x.c0 + 1)
        )
        return (
            coef
            + x.intervention_size * math.log(p)
            + x.control_size * math.log1p(-p)
            + margin_terms
        )
    m = design.m
    return (
        log_binomial(m, x.i1)
        + log_binomial(design.n - m, x.c1)
        + margin_terms
    )


def _roster(theta: Theta) -> list[int]:
    """Subject list coded by type: 0=A, 1=C, 2=D, 3=N."""
    codes: list[int] = []
    for code, count in enumerate(theta.counts()):
        codes.extend([code] * count)
    return codes


def oracle_data_distribution(theta: Theta, m: int) -> dict[ExperimentData, int]:
    """Tally of the data produced by every one of the C(n, m) assignments.

    Brute-force reference implementation: enumerates actual subsets, so it is
    independent of the binomial-sum likelihood it is used to check.
    """
    n = theta.n
    if n > ORACLE_MAX_N:
        raise BudgetExceededError(
            f"assignment oracle enumerates all subsets; n={n} exceeds {ORACLE_MAX_N}"
        )
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    codes = _roster(theta)
    # takeup indicator per type in intervention and in control
    takes_i = (1, 1, 0, 0)
    takes_c = (1, 0, 1, 0)
    total_c1 = theta.at + theta.de
    tally: dict[ExperimentData, int] = {}
    for subset in combinations(range(n), m):
        i1 = sum(takes_i[codes[j]] for j in subset)
        c1 = total_c1 - sum(takes_c[codes[j]] for j in subset)
        x = ExperimentData(i1, m - i1, c1, n - m - c1)
        tally[x] = tally.get(x, 0) + 1
    return tally


def oracle_assignment_count(theta: Theta, x: ExperimentData, m: int) -> int:
    """Number of size-m assignments of theta's sample that produce x, by enumeration."""
    if x.n != theta.n:
        raise ValueError(f"data n={x.n} but theta n={theta.n}")
    return oracle_data_distribution(theta, m).get(x, 0)


def assignment_count_grid(x: ExperimentData) -> np.ndarray:
    """Assignment count of every Theta with n = x.n, in canonical order.

    Instead of visiting each parameter vector and summing its feasible arm
    compositions, this enumerates the compositions themselves: a choice of how
    many intervention takers are always takers, how many intervention
    non-takers are defiers, and likewise for the control cells, determines one
    parameter vector and one product of four binomial coefficients.  Each
    (theta, composition) pair is visited exactly once, so scatter-adding the
    products over the composition grid fills the whole likelihood in
    O((i1+1)(i0+1)(c1+1)(c0+1)) work.

    Values are float64; counts are exact wherever they stay below 2**53, and
    suspected ties are confirmed with exact integer sums by callers.
    """
    n = x.n
    if n > GRID_MAX_N:
        raise BudgetExceededError(
            f"full likelihood grid at n={n} exceeds the guard of {GRID_MAX_N}"
        )
    i1, i0, c1, c0 = x.counts()
    table = choose_table(n)
    index = theta_index(n)
    grid = np.zeros(index.size)
    d_i = np.arange(i0 + 1, dtype=np.int64)[:, None, None]  # defiers in intervention
    a_c = np.arange(c1 + 1, dtype=np.int64)[None, :, None]  # always takers in control
    c_c = np.arange(c0 + 1, dtype=np.int64)[None, None, :]  # compliers in control
    for a_i in range(i1 + 1):  # always takers in intervention
        at = a_i + a_c
        co = (i1 - a_i) + c_c
        de = d_i + (c1 - a_c)
        nt = (i0 - d_i) + (c0 - c_c)
        term = table[at, a_i] * table[co, i1 - a_i] * table[de, d_i] * table[nt, i0 - d_i]
        idx = index.flatten(at, co, de)
        np.add.at(grid, np.broadcast_to(idx, term.shape).ravel(), term.ravel())
    return grid
