"""Core types for the structured Gaussian detection problem.

An observation is a length-n real vector.  Under the null every coordinate is
standard normal.  Under a contaminated hypothesis the coordinates inside one
member S of a class of K-element index sets get mean mu > 0, variance stays 1.
Index sets are 1-based everywhere, including file output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .classes import SetClass

#: Ceiling on class cardinality for any operation that materializes members.
DEFAULT_ENUMERATION_CAP = 2_000_000


class DimensionMismatchError(ValueError):
    """Ambient dimensions of two objects disagree."""


class DegenerateParameterError(ValueError):
    """A parameter value makes the requested rule undefined (e.g. mu = 0)."""


class CapExceededError(RuntimeError):
    """Class cardinality exceeds the enumeration cap for this operation."""

    def __init__(self, cardinality: int, cap: int):
        self.cardinality = cardinality
        self.cap = cap
        super().__init__(
            f"class has {cardinality} members, enumeration capped at {cap}"
        )


class MTooLargeForClassError(ValueError):
    """Requested without-replacement sample is too large for the class."""


class AsymmetricClassError(ValueError):
    """Operation requires a symmetric class family."""


@dataclass(frozen=True)
class IndexSet:
    """A set of distinct 1-based coordinate indices inside an ambient [1, n].

    ``indices`` is stored sorted strictly increasing; the constructor accepts
    any order and validates range and distinctness.
    """

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(idx) == 0:
            raise ValueError("index set must be nonempty")
        if len(set(idx)) != len(idx):
            raise ValueError("indices must be distinct")
        if idx[0] < 1 or idx[-1] > self.n:
            raise ValueError(f"indices must lie in [1, {self.n}], got {idx}")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64) - 1

    def encode(self) -> str:
        """Canonical text encoding: comma-separated increasing indices."""
        return ",".join(str(i) for i in self.indices)

    @classmethod
    def decode(cls, text: str, n: int) -> "IndexSet":
        return cls(tuple(int(t) for t in text.split(",")), n)


def overlap(s: IndexSet, t: IndexSet) -> int:
    """|S ∩ T|.  Both sets must share the ambient dimension."""
    if s.n != t.n:
        raise DimensionMismatchError(f"ambient dimensions differ: {s.n} != {t.n}")
    return len(set(s.indices) & set(t.indices))


def canonical_distance(s: IndexSet, t: IndexSet) -> float:
    """sqrt of the symmetric-difference size; for equal sizes equals
    sqrt(2(K - |S ∩ T|))."""
    if s.n != t.n:
        raise DimensionMismatchError(f"ambient dimensions differ: {s.n} != {t.n}")
    if len(s) != len(t):
        raise ValueError("canonical distance is defined for equal-size sets only")
    return float(np.sqrt(len(s) + len(t) - 2 * overlap(s, t)))


@dataclass(frozen=True)
class SeededRng:
    """Deterministic stream addressed by (master_seed, path of child keys).

    ``child(*keys)`` derives an independent substream; ``generator()`` returns
    a fresh numpy Generator whose output depends only on the full address, so
    identical addresses replay identical streams regardless of call order,
    chunking, or worker count.
    """

    master_seed: int
    stream: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if any(k < 0 for k in self.stream):
            raise ValueError("stream keys must be nonnegative")

    def child(self, *keys: int) -> "SeededRng":
        return SeededRng(self.master_seed, self.stream + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence((self.master_seed,) + self.stream)
        return np.random.Generator(np.random.PCG64(seq))


def _as_generator(rng: "SeededRng | np.random.Generator") -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    return rng


@dataclass(frozen=True)
class Observation:
    """Validated length-n observation vector (read-only)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("observation must be a nonempty 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("observation must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)


def as_vector(x: "Observation | np.ndarray | Iterable[float]", n: int) -> np.ndarray:
    """Coerce an observation-like input to a validated length-n float vector."""
    if isinstance(x, Observation):
        v = x.values
    else:
        v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size != n:
        raise DimensionMismatchError(f"expected a length-{n} vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class ProblemInstance:
    """A class of candidate index sets together with the shift size mu >= 0."""

    set_class: "SetClass"
    mu: float

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu < 0:
            raise ValueError("mu must be finite and nonnegative")
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def n(self) -> int:
        return self.set_class.n

    @property
    def K(self) -> int:
        return self.set_class.K


def gaussian_sample(
    instance: ProblemInstance,
    hypothesis: IndexSet | None,
    rng: "SeededRng | np.random.Generator",
) -> Observation:
    """Draw one observation: i.i.d. N(0,1), plus mu on ``hypothesis`` if given.

    ``hypothesis`` None means the null.  A non-null hypothesis must be a
    member of the instance's class (membership is cheaply decidable for every
    built-in family).
    """
    gen = _as_generator(rng)
    n = instance.n
    if hypothesis is not None:
        if hypothesis.n != n:
            raise DimensionMismatchError(
                f"hypothesis ambient dimension {hypothesis.n} != instance n {n}"
            )
        if len(hypothesis) != instance.K:
            raise ValueError(
                f"hypothesis has {len(hypothesis)} indices, class members have {instance.K}"
            )
        if not instance.set_class.contains(hypothesis):
            raise ValueError(f"{hypothesis.encode()} is not a member of the class")
    x = gen.standard_normal(n)
    if hypothesis is not None and instance.mu != 0.0:
        x[hypothesis.zero_based()] += instance.mu
    return Observation(x)
