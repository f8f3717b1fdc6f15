"""Value types for a binary-intervention / binary-outcome randomized experiment.

The estimand is the joint distribution of potential outcomes in the fixed
sample, summarized by four type counts (always takers, compliers, defiers,
never takers).  The data are four observed cell counts.  Everything here is
an immutable value type; enumeration of the parameter space is canonical and
deterministic so that downstream reports are reproducible byte for byte.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from math import comb
from typing import Iterator

import numpy as np

# Type constructors refuse samples larger than this; every enumeration the
# library performs sits far below it.
MAX_N = 100_000


class DegenerateDataError(ValueError):
    """Raised when data cannot support an estimator (e.g. an empty arm)."""


class DesignInconsistencyError(ValueError):
    """Raised when a design contradicts the data it is paired with."""


class BudgetExceededError(RuntimeError):
    """Raised when a computation would exceed its documented size guard."""


def _check_counts(name: str, values: tuple[int, ...]) -> None:
    for v in values:
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
            raise ValueError(f"{name} counts must be integers, got {v!r}")
        if v < 0:
            raise ValueError(f"{name} counts must be non-negative, got {v}")
    if sum(values) > MAX_N:
        raise ValueError(f"{name} total {sum(values)} exceeds the cap of {MAX_N}")


@dataclass(frozen=True)
class Theta:
    """Joint distribution of potential outcomes in the sample, as type counts.

    ``at`` always takers (take up under both arms), ``co`` compliers (take up
    only under intervention), ``de`` defiers (take up only under control),
    ``nt`` never takers.  The sample size is the sum of the four counts.
    """

    at: int
    co: int
    de: int
    nt: int

    def __post_init__(self) -> None:
        _check_counts("Theta", (self.at, self.co, self.de, self.nt))

    @property
    def n(self) -> int:
        return self.at + self.co + self.de + self.nt

    def counts(self) -> tuple[int, int, int, int]:
        return (self.at, self.co, self.de, self.nt)

    def types_present(self) -> str:
        """Letters among "ACDN" whose type count is positive."""
        return "".join(
            letter
            for letter, count in zip("ACDN", self.counts())
            if count > 0
        )

    def average_effect(self) -> float:
        """(compliers - defiers) / n: the mean of the in-sample unit effects."""
        if self.n == 0:
            raise DegenerateDataError("average effect undefined for n = 0")
        return (self.co - self.de) / self.n

    def relabeled(self) -> "Theta":
        """Swap takeup and no-takeup labels (A<->N, C<->D)."""
        return Theta(self.nt, self.de, self.co, self.at)


@dataclass(frozen=True)
class ExperimentData:
    """Observed cell counts: takeup/no-takeup crossed with intervention/control."""

    i1: int  # takeup in intervention
    i0: int  # no takeup in intervention
    c1: int  # takeup in control
    c0: int  # no takeup in control

    def __post_init__(self) -> None:
        _check_counts("ExperimentData", (self.i1, self.i0, self.c1, self.c0))

    @property
    def n(self) -> int:
        return self.i1 + self.i0 + self.c1 + self.c0

    @property
    def intervention_size(self) -> int:
        return self.i1 + self.i0

    @property
    def control_size(self) -> int:
        return self.c1 + self.c0

    def counts(self) -> tuple[int, int, int, int]:
        return (self.i1, self.i0, self.c1, self.c0)

    def relabeled(self) -> "ExperimentData":
        """Swap takeup and no-takeup labels in both arms."""
        return ExperimentData(self.i0, self.i1, self.c0, self.c1)

    def average_effect(self) -> float:
        """Difference of observed takeup rates between arms."""
        if self.intervention_size == 0 or self.control_size == 0:
            raise DegenerateDataError("average effect needs both arms non-empty")
        return self.i1 / self.intervention_size - self.c1 / self.control_size


@dataclass(frozen=True)
class Bernoulli:
    """Simple randomization: each subject enters intervention with probability p."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"Bernoulli probability must be in (0,1), got {self.p}")


@dataclass(frozen=True)
class CompletelyRandomized:
    """Exactly m of n subjects drawn into intervention, all subsets equally likely."""

    m: int
    n: int

    def __post_init__(self) -> None:
        _check_counts("CompletelyRandomized", (self.m, self.n))
        if self.m > self.n:
            raise ValueError(f"need m <= n, got m={self.m} n={self.n}")


Design = Bernoulli | CompletelyRandomized


def check_design(x: ExperimentData, design: Design) -> None:
    """Validate that a design is consistent with observed data."""
    if isinstance(design, CompletelyRandomized):
        if design.n != x.n:
            raise DesignInconsistencyError(
                f"design n={design.n} but data total is {x.n}"
            )
        if design.m != x.intervention_size:
            raise DesignInconsistencyError(
                f"design m={design.m} but intervention arm has {x.intervention_size}"
            )


@dataclass(frozen=True)
class ArmSplit:
    """Counts of each type randomized into the intervention arm."""

    at_i: int
    co_i: int
    de_i: int
    nt_i: int

    def __post_init__(self) -> None:
        _check_counts("ArmSplit", (self.at_i, self.co_i, self.de_i, self.nt_i))

    def counts(self) -> tuple[int, int, int, int]:
        return (self.at_i, self.co_i, self.de_i, self.nt_i)


def data_from_split(theta: Theta, split: ArmSplit) -> ExperimentData:
    """Observed cell counts produced when ``split`` of ``theta`` enters intervention.

    Takers in intervention are the always takers and compliers assigned there;
    takers in control are the always takers and defiers left behind.
    """
    for have, cap, label in zip(split.counts(), theta.counts(), "ACDN"):
        if have > cap:
            raise ValueError(
                f"split assigns {have} of type {label} but theta has only {cap}"
            )
    return ExperimentData(
        i1=split.at_i + split.co_i,
        i0=split.nt_i + split.de_i,
        c1=(theta.at - split.at_i) + (theta.de - split.de_i),
        c0=(theta.nt - split.nt_i) + (theta.co - split.co_i),
    )


def theta_count(n: int) -> int:
    """Number of four-part compositions of n: C(n+3, 3)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return comb(n + 3, 3)


def enumerate_thetas(n: int) -> Iterator[Theta]:
    """Yield every Theta with counts summing to n, exactly once.

    Order is lexicographic descending by (at, co, de) with nt implied, so
    (n,0,0,0) comes first and (0,0,0,n) last.  This fixes tie reporting,
    credible-set construction, and CSV output.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > MAX_N:
        raise ValueError(f"n={n} exceeds the cap of {MAX_N}")
    for at in range(n, -1, -1):
        for co in range(n - at, -1, -1):
            for de in range(n - at - co, -1, -1):
                yield Theta(at, co, de, n - at - co - de)


class ThetaIndex:
    """Flat indexing of the canonical Theta enumeration, vectorized.

    Index i corresponds to the i-th element of ``enumerate_thetas(n)``.  Used
    so that grid scans can work on plain numpy arrays instead of objects.
    """

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        # j = n - at; thetas with larger at come first, and the number of
        # vectors preceding the at-block is C(j+2, 3).
        j = np.arange(n + 2, dtype=np.int64)
        self._base = j * (j + 1) * (j + 2) // 6

    @property
    def size(self) -> int:
        return int(self._base[-1])

    def flatten(self, at, co, de):
        """Flat index of (at, co, de[, nt implied]); accepts scalars or arrays."""
        at = np.asarray(at, dtype=np.int64)
        co = np.asarray(co, dtype=np.int64)
        de = np.asarray(de, dtype=np.int64)
        u = self.n - at - co  # vectors with this at and larger co come first
        return self._base[self.n - at] + u * (u + 1) // 2 + (u - de)

    def components(self, idx):
        """Inverse of ``flatten``: arrays (at, co, de, nt) for flat indices."""
        idx = np.asarray(idx, dtype=np.int64)
        j = np.searchsorted(self._base, idx, side="right") - 1
        at = self.n - j
        r = idx - self._base[j]
        # Initial guess from the triangular offset formula, then exact fix-up.
        u = ((np.sqrt(8.0 * r + 1.0) - 1.0) // 2).astype(np.int64)
        u = np.maximum(u, 0)
        for _ in range(2):
            u = np.where(u * (u + 1) // 2 > r, u - 1, u)
            u = np.where((u + 1) * (u + 2) // 2 <= r, u + 1, u)
        co = j - u
        de = u - (r - u * (u + 1) // 2)
        return at, co, de, self.n - at - co - de

    def theta(self, idx: int) -> Theta:
        at, co, de, nt = self.components(np.asarray([idx]))
        return Theta(int(at[0]), int(co[0]), int(de[0]), int(nt[0]))

    def flat(self, theta: Theta) -> int:
        if theta.n != self.n:
            raise ValueError(f"theta has n={theta.n}, index built for n={self.n}")
        return int(self.flatten(theta.at, theta.co, theta.de))


@functools.lru_cache(maxsize=16)
def theta_index(n: int) -> ThetaIndex:
    return ThetaIndex(n)
