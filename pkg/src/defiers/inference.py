"""Grid-search maximum likelihood, posterior under a uniform prior, credible sets.

The scan works on the float64 likelihood grid; any maximizer or boundary
candidates that the float values cannot separate are re-checked with exact
integer assignment counts before ties are reported.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import (
    Design,
    ExperimentData,
    Theta,
    ThetaIndex,
    check_design,
    theta_count,
    theta_index,
)
from .combinatorics import log_tie_cutoff
from .likelihood import (
    assignment_count_grid,
    exact_assignment_count,
    log_likelihood,
)
from .frechet import FrechetSet, estimate_marginals, frechet_set

# Full posterior tables (zero-mass entries included) are materialized up to
# this sample size; larger grids keep positive-mass entries only.
FULL_TABLE_MAX_N = 300

# Exact tie confirmation is attempted on at most this many candidates; beyond
# it, bit-equal float grouping is used and results are flagged unverified.
EXACT_TIE_CAP = 10_000


@functools.lru_cache(maxsize=2)
def _cached_grid(x: ExperimentData) -> np.ndarray:
    grid = assignment_count_grid(x)
    grid.setflags(write=False)
    return grid


@dataclass(frozen=True)
class MleResult:
    """All likelihood maximizers for one data realization, in canonical order."""

    maximizers: tuple[Theta, ...]
    log_likelihood: float
    tie_verified_exact: bool

    @property
    def weight(self) -> float:
        """Selection weight the decision rule puts on each maximizer."""
        return 1.0 / len(self.maximizers)

    @property
    def estimate(self) -> Theta:
        """First maximizer in canonical order (the unique MLE when no tie)."""
        return self.maximizers[0]


def _exact_counts(index: ThetaIndex, flat: np.ndarray, x: ExperimentData) -> list[int]:
    at, co, de, nt = index.components(flat)
    return [
        exact_assignment_count(Theta(int(a), int(c), int(d), int(t)), x)
        for a, c, d, t in zip(at, co, de, nt)
    ]


def _argmax_ties(
    grid: np.ndarray, x: ExperimentData, candidate_flat: np.ndarray | None = None
) -> tuple[np.ndarray, bool]:
    """Flat indices of all exact maximizers, ascending (= canonical order).

    ``candidate_flat`` restricts the search to a subset of the grid.
    """
    index = theta_index(x.n)
    values = grid if candidate_flat is None else grid[candidate_flat]
    top = float(values.max())
    if top <= 0.0:
        raise AssertionError("likelihood is zero everywhere; data inconsistent")
    cutoff = math.exp(log_tie_cutoff(math.log(top)))
    near = np.nonzero(values >= cutoff)[0]
    flat = near if candidate_flat is None else candidate_flat[near]
    if flat.size == 1:
        return flat, True
    if flat.size > EXACT_TIE_CAP:
        # Too many suspects for exact confirmation: keep bit-equal maxima.
        return np.sort(flat[grid[flat] == top]), False
    counts = _exact_counts(index, flat, x)
    best = max(counts)
    ties = flat[np.asarray([c == best for c in counts])]
    return np.sort(ties), True


def _thetas_from_flat(n: int, flat: np.ndarray) -> tuple[Theta, ...]:
    index = theta_index(n)
    at, co, de, nt = index.components(flat)
    return tuple(
        Theta(int(a), int(c), int(d), int(t)) for a, c, d, t in zip(at, co, de, nt)
    )


def mle(x: ExperimentData, design: Design) -> MleResult:
    """Exhaustive grid-search maximum likelihood estimate, with all ties."""
    check_design(x, design)
    grid = _cached_grid(x)
    flat, verified = _argmax_ties(grid, x)
    maximizers = _thetas_from_flat(x.n, flat)
    return MleResult(
        maximizers=maximizers,
        log_likelihood=log_likelihood(maximizers[0], x, design),
        tie_verified_exact=verified,
    )


@functools.lru_cache(maxsize=8)
def _monotone_flat_indices(n: int) -> np.ndarray:
    """Flat indices of all thetas with no defiers or no compliers."""
    index = theta_index(n)
    chunks = []
    for at in range(n + 1):
        co = np.arange(n - at + 1, dtype=np.int64)
        chunks.append(index.flatten(np.full_like(co, at), co, np.zeros_like(co)))
        de = np.arange(1, n - at + 1, dtype=np.int64)
        chunks.append(index.flatten(np.full_like(de, at), np.zeros_like(de), de))
    out = np.unique(np.concatenate(chunks))
    out.setflags(write=False)
    return out


def monotonicity_mle(x: ExperimentData, design: Design) -> MleResult:
    """Maximum likelihood restricted to no-defier and/or no-complier vectors."""
    check_design(x, design)
    grid = _cached_grid(x)
    flat, verified = _argmax_ties(grid, x, _monotone_flat_indices(x.n))
    maximizers = _thetas_from_flat(x.n, flat)
    return MleResult(
        maximizers=maximizers,
        log_likelihood=log_likelihood(maximizers[0], x, design),
        tie_verified_exact=verified,
    )


def frechet_rule_support(
    x: ExperimentData, design: Design
) -> tuple[FrechetSet, tuple[Theta, ...], float]:
    """Members of the estimated Fréchet set, each carrying equal weight."""
    fs = frechet_set(estimate_marginals(x, design))
    members = tuple(fs.members())
    return fs, members, 1.0 / len(members)


class PosteriorTable:
    """Posterior over the parameter grid under a uniform prior, sorted.

    Entries are stored as flat component arrays ordered by descending mass and
    then canonical order, so the table stays usable at millions of entries.
    Above ``FULL_TABLE_MAX_N`` only positive-mass entries are materialized;
    the untouched tail has exactly zero mass either way.
    """

    def __init__(
        self,
        x: ExperimentData,
        design: Design,
        at: np.ndarray,
        co: np.ndarray,
        de: np.ndarray,
        mass: np.ndarray,
        tail_count: int,
    ):
        self.x = x
        self.design = design
        self.at = at
        self.co = co
        self.de = de
        self.mass = mass
        self.tail_count = tail_count

    @property
    def n(self) -> int:
        return self.x.n

    @property
    def entry_count(self) -> int:
        return int(self.mass.size)

    @property
    def total_count(self) -> int:
        """Size of the full parameter grid, materialized or not."""
        return self.entry_count + self.tail_count

    def theta_at(self, i: int) -> Theta:
        at, co, de = int(self.at[i]), int(self.co[i]), int(self.de[i])
        return Theta(at, co, de, self.n - at - co - de)

    def entries(self, limit: int | None = None) -> Iterator[tuple[Theta, float]]:
        stop = self.entry_count if limit is None else min(limit, self.entry_count)
        for i in range(stop):
            yield self.theta_at(i), float(self.mass[i])

    def top(self) -> tuple[Theta, float]:
        return self.theta_at(0), float(self.mass[0])


def posterior(x: ExperimentData, design: Design) -> PosteriorTable:
    """Posterior masses proportional to the likelihood under a uniform prior."""
    check_design(x, design)
    grid = _cached_grid(x)
    index = theta_index(x.n)
    if theta_count(x.n) <= theta_count(FULL_TABLE_MAX_N):
        flat = np.arange(grid.size, dtype=np.int64)
        values = grid
        tail = 0
    else:
        flat = np.nonzero(grid)[0]
        values = grid[flat]
        tail = grid.size - flat.size
    total = values.sum()
    assert total > 0.0, "saturated theta always has positive likelihood"
    order = np.lexsort((flat, -values))
    flat = flat[order]
    mass = values[order] / total
    at, co, de, _ = index.components(flat)
    return PosteriorTable(
        x,
        design,
        at.astype(np.uint32),
        co.astype(np.uint32),
        de.astype(np.uint32),
        mass,
        tail,
    )


@dataclass(frozen=True)
class CredibleSummary:
    """Smallest credible set at a level, summarized by per-type count ranges.

    The four ranges are taken over members of one joint set, so they are
    dependent: combining the four extremes need not give a member.
    """

    level: float
    member_count: int
    achieved_mass: float
    at_range: tuple[int, int]
    co_range: tuple[int, int]
    de_range: tuple[int, int]
    nt_range: tuple[int, int]

    def range_of(self, letter: str) -> tuple[int, int]:
        return {
            "A": self.at_range,
            "C": self.co_range,
            "D": self.de_range,
            "N": self.nt_range,
        }[letter]


def _boundary_members(
    post: PosteriorTable, run_start: int, run_end: int, k: int, level: float, pre_mass: float
) -> np.ndarray:
    """Entries of the boundary float-tie run that belong in the credible set.

    Float masses that compare equal can hide exactly distinct counts, so the
    run is re-ordered by exact count (descending, canonical within blocks) and
    whole equal-count blocks are admitted until the level is reached.
    """
    run = np.arange(run_start, run_end + 1)
    if run.size > EXACT_TIE_CAP:
        return run  # accept the whole float block; conservative and deterministic
    index = theta_index(post.n)
    flat = index.flatten(
        post.at[run].astype(np.int64),
        post.co[run].astype(np.int64),
        post.de[run].astype(np.int64),
    )
    counts = _exact_counts(index, flat, post.x)
    order = sorted(range(run.size), key=lambda i: (-counts[i], flat[i]))
    v = float(post.mass[k])
    taken: list[int] = []
    acc = pre_mass
    pos = 0
    while pos < run.size and acc < level:
        block = [order[pos]]
        pos += 1
        while pos < run.size and counts[order[pos]] == counts[block[0]]:
            block.append(order[pos])
            pos += 1
        taken.extend(block)
        acc += v * len(block)
    return run[np.asarray(taken, dtype=np.int64)]


def smallest_credible_set(post: PosteriorTable, level: float) -> CredibleSummary:
    """Fewest-member set with posterior mass at or above the level.

    Entries are accumulated from the highest mass down; where several entries
    share one mass, the whole tie block enters together.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    mass = post.mass
    cum = np.cumsum(mass)
    k = int(np.searchsorted(cum, level, side="left"))
    if k >= mass.size:
        k = mass.size - 1
    v = mass[k]
    # Bit-equal float run containing the crossing entry.
    run_start = int(np.searchsorted(-mass, -v, side="left"))
    run_end = int(np.searchsorted(-mass, -v, side="right")) - 1
    pre_mass = float(cum[run_start - 1]) if run_start > 0 else 0.0
    if run_start == run_end:
        boundary = np.arange(run_start, k + 1)
    else:
        boundary = _boundary_members(post, run_start, run_end, k, level, pre_mass)
    idx = np.concatenate((np.arange(run_start), boundary))
    achieved = pre_mass + float(v) * boundary.size
    at = post.at[idx]
    co = post.co[idx]
    de = post.de[idx]
    nt = post.n - at.astype(np.int64) - co.astype(np.int64) - de.astype(np.int64)
    return CredibleSummary(
        level=level,
        member_count=int(idx.size),
        achieved_mass=achieved,
        at_range=(int(at.min()), int(at.max())),
        co_range=(int(co.min()), int(co.max())),
        de_range=(int(de.min()), int(de.max())),
        nt_range=(int(nt.min()), int(nt.max())),
    )
