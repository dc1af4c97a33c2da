"""Sparse two-particle states over labelled spatial modes.

A :class:`TwoParticleState` maps ``(a, b)`` mode pairs to complex amplitudes,
where ``a`` labels the mode occupied by particle A and ``b`` the mode of
particle B. Only the populated pairs are stored. Norm is allowed to drop
below one because crossing modes may annihilate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

ZERO_THRESHOLD = 1e-12

Pair = tuple[int, int]


class Particle(str, enum.Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True, order=True)
class Mode:
    particle: Particle
    index: int

    def __post_init__(self):
        object.__setattr__(self, "particle", Particle(self.particle))
        if self.index < 0:
            raise ValueError(f"mode index must be nonnegative, got {self.index}")

    def __str__(self) -> str:
        return f"{self.particle.value.lower()}{self.index}"


class DimensionMismatchError(ValueError):
    """Two states declared over different mode spaces."""


class ModeIndexError(IndexError):
    pass


@dataclass(frozen=True, eq=False)
class TwoParticleState:
    """Immutable sparse amplitude table.

    Amplitudes with magnitude below ``ZERO_THRESHOLD`` are dropped on
    construction, so ``len(state)`` is the size of the support.
    """

    mode_count_a: int
    mode_count_b: int
    amplitudes: Mapping[Pair, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[Pair, complex] = {}
        for (a, b), amp in self.amplitudes.items():
            a, b = int(a), int(b)
            if not (0 <= a < self.mode_count_a and 0 <= b < self.mode_count_b):
                raise ModeIndexError(
                    f"pair (a{a}, b{b}) outside mode space "
                    f"{self.mode_count_a}x{self.mode_count_b}"
                )
            amp = complex(amp)
            if abs(amp) >= ZERO_THRESHOLD:
                clean[(a, b)] = amp
        object.__setattr__(self, "amplitudes", MappingProxyType(clean))

    @classmethod
    def basis(cls, mode_count_a: int, mode_count_b: int, a: int, b: int) -> "TwoParticleState":
        return cls(mode_count_a, mode_count_b, {(a, b): 1.0})

    @classmethod
    def empty(cls, mode_count_a: int, mode_count_b: int) -> "TwoParticleState":
        return cls(mode_count_a, mode_count_b, {})

    @property
    def dims(self) -> Pair:
        return (self.mode_count_a, self.mode_count_b)

    def __getitem__(self, pair: Pair) -> complex:
        return self.amplitudes.get(tuple(pair), 0j)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __iter__(self):
        return iter(self.amplitudes.items())

    def modes_a(self) -> list[int]:
        return sorted({a for a, _ in self.amplitudes})

    def modes_b(self) -> list[int]:
        return sorted({b for _, b in self.amplitudes})

    def _check_same_space(self, other: "TwoParticleState") -> None:
        if self.dims != other.dims:
            raise DimensionMismatchError(f"mode spaces differ: {self.dims} vs {other.dims}")

    def __add__(self, other: "TwoParticleState") -> "TwoParticleState":
        self._check_same_space(other)
        out = dict(self.amplitudes)
        for pair, amp in other.amplitudes.items():
            out[pair] = out.get(pair, 0j) + amp
        return TwoParticleState(self.mode_count_a, self.mode_count_b, out)

    def __mul__(self, scalar: complex) -> "TwoParticleState":
        return TwoParticleState(
            self.mode_count_a,
            self.mode_count_b,
            {pair: scalar * amp for pair, amp in self.amplitudes.items()},
        )

    __rmul__ = __mul__

    def allclose(self, other: "TwoParticleState", atol: float = 1e-10) -> bool:
        if self.dims != other.dims:
            return False
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    def __repr__(self) -> str:
        terms = ", ".join(
            f"a{a}b{b}: {amp:.6g}" for (a, b), amp in sorted(self.amplitudes.items())
        )
        return f"TwoParticleState({terms})"


def from_terms(
    mode_count_a: int, mode_count_b: int, terms: Iterable[tuple[int, int, complex]]
) -> TwoParticleState:
    """Build a state from ``(a, b, amplitude)`` triples, summing repeats."""
    out: dict[Pair, complex] = {}
    for a, b, amp in terms:
        out[(a, b)] = out.get((a, b), 0j) + complex(amp)
    return TwoParticleState(mode_count_a, mode_count_b, out)


def inner_product(bra: TwoParticleState, ket: TwoParticleState) -> complex:
    """<bra|ket>, conjugate-linear in ``bra``."""
    bra._check_same_space(ket)
    small, large = (bra, ket) if len(bra) <= len(ket) else (ket, bra)
    total = 0j
    for pair in small.amplitudes:
        if pair in large.amplitudes:
            total += bra.amplitudes[pair].conjugate() * ket.amplitudes[pair]
    return total


def project(state: TwoParticleState, pair: Pair) -> TwoParticleState:
    """Apply the product projector |a b><a b| for ``pair = (a, b)``."""
    a, b = pair
    if not (0 <= a < state.mode_count_a and 0 <= b < state.mode_count_b):
        raise ModeIndexError(f"projector pair (a{a}, b{b}) outside mode space {state.dims}")
    amp = state[(a, b)]
    return TwoParticleState(state.mode_count_a, state.mode_count_b, {(a, b): amp} if amp else {})


def squared_norm(state: TwoParticleState) -> float:
    return float(sum(abs(amp) ** 2 for amp in state.amplitudes.values()))
