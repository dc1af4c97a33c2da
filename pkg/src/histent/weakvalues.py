"""Sequential weak values of bipartite histories.

A weak value is a propagator divided by the sum over the complete set of
histories with the same pre- and postselection. The matrix of weak values
differs from the propagator matrix by one complex factor, so it carries the
same Schmidt spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entanglement import DEFAULT_RANK_TOL, SchmidtSpectrum, normalized_gram, spectrum_from_gram

DENOMINATOR_TOL = 1e-12


class UndefinedWeakValueError(ZeroDivisionError):
    """The propagators sum to zero (dark postselection port)."""


@dataclass(frozen=True, eq=False)
class WeakValueMatrix:
    entries: np.ndarray
    denominator: complex

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True)
class PointerModel:
    """Gaussian meter pointer weakly coupled with strength ``g``."""

    g: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"pointer width must be positive, got {self.sigma}")


def weak_value_matrix(matrix) -> WeakValueMatrix:
    entries = np.asarray(getattr(matrix, "entries", matrix), dtype=complex)
    total = complex(entries.sum())
    if abs(total) <= DENOMINATOR_TOL:
        raise UndefinedWeakValueError(
            f"propagators sum to {total:.3g}; weak values undefined for this postselection"
        )
    out = entries / total
    out.setflags(write=False)
    return WeakValueMatrix(out, total)


def spectrum_from_weak_values(wvm: WeakValueMatrix, tolerance: float = DEFAULT_RANK_TOL) -> SchmidtSpectrum:
    """Schmidt coefficients from the eigenvalues of M M^dagger / Tr(M M^dagger)."""
    return spectrum_from_gram(normalized_gram(wvm.entries), min(wvm.entries.shape), tolerance)


def pointer_readout(weak_value: complex, model: PointerModel) -> tuple[float, float]:
    """First-order pointer expectations <x> and <k> for a given weak value."""
    w = complex(weak_value)
    return model.g * w.real, model.g * w.imag / (2.0 * model.sigma**2)
