"""Schmidt spectra and entanglement measures of propagator matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-9
ROUTE_TOL = 1e-8
ENTROPY_FLOOR = 1e-15
_MIN_TRACE = 1e-14


class ZeroPropagatorError(ValueError):
    """Every propagator vanishes: the postselection is impossible."""


class RouteDisagreementError(ArithmeticError):
    """SVD and Gram eigen-solve produced different spectra."""


def _entries(matrix) -> np.ndarray:
    arr = np.asarray(getattr(matrix, "entries", matrix), dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def _trace_gram(arr: np.ndarray) -> float:
    tr = float(np.sum(np.abs(arr) ** 2))
    if tr <= _MIN_TRACE:
        raise ZeroPropagatorError("Tr(C C^dagger) vanishes; postselection has zero amplitude")
    return tr


@dataclass(frozen=True)
class SchmidtSpectrum:
    lambdas: tuple[float, ...]
    tolerance: float = DEFAULT_RANK_TOL

    @property
    def squared(self) -> tuple[float, ...]:
        return tuple(x * x for x in self.lambdas)

    def __len__(self) -> int:
        return len(self.lambdas)


@dataclass(frozen=True)
class EntanglementReport:
    spectrum: SchmidtSpectrum
    rank: int
    concurrence: float
    entropy: float
    robustness: float
    entangled: bool


def normalized_gram(matrix) -> np.ndarray:
    """C C^dagger / Tr(C C^dagger)."""
    arr = _entries(matrix)
    gram = arr @ arr.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    return gram / _trace_gram(arr)


def spectrum_from_gram(gram: np.ndarray, length: int, tolerance: float = DEFAULT_RANK_TOL) -> SchmidtSpectrum:
    """Schmidt coefficients as square roots of the largest ``length`` eigenvalues."""
    evals = np.linalg.eigvalsh(gram)[::-1][:length]
    lambdas = np.sqrt(np.clip(evals, 0.0, None))
    return SchmidtSpectrum(tuple(float(x) for x in lambdas), tolerance)


def schmidt_spectrum(matrix, tolerance: float = DEFAULT_RANK_TOL) -> SchmidtSpectrum:
    """Singular values of C / sqrt(Tr C C^dagger), cross-checked by eigen-solve.

    Raises :class:`RouteDisagreementError` if the squared singular values and
    the eigenvalues of the normalized Gram matrix differ by more than 1e-8.
    """
    arr = _entries(matrix)
    scale = math.sqrt(_trace_gram(arr))
    svals = np.linalg.svd(arr / scale, compute_uv=False)
    evals = np.array(spectrum_from_gram(normalized_gram(arr), len(svals)).squared)
    gap = float(np.max(np.abs(svals**2 - evals))) if len(svals) else 0.0
    if gap > ROUTE_TOL:
        raise RouteDisagreementError(f"SVD and Gram spectra disagree by {gap:.3g}")
    return SchmidtSpectrum(tuple(float(x) for x in svals), tolerance)


def schmidt_rank(spectrum: SchmidtSpectrum, tol: float | None = None) -> int:
    tol = spectrum.tolerance if tol is None else tol
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    return sum(1 for x in spectrum.lambdas if x > tol)


def purity(matrix) -> float:
    """Tr(C~^2), with C~ the normalized Gram matrix."""
    gram = normalized_gram(matrix)
    return float(np.real(np.sum(np.abs(gram) ** 2)))


def concurrence(matrix) -> float:
    """sqrt(2 [1 - Tr(C~^2)]) without any eigendecomposition.

    ``1 - Tr(C~^2)`` is evaluated as twice the sum of squared 2x2 minors of C
    over Tr(C C^dagger)^2, which is the same quantity but keeps full relative
    precision for nearly separable matrices.
    """
    arr = _entries(matrix)
    tr = _trace_gram(arr)
    rows, cols = arr.shape
    if rows < 2 or cols < 2:
        return 0.0
    i, j = np.triu_indices(rows, 1)
    k, l = np.triu_indices(cols, 1)
    minors = arr[i][:, k] * arr[j][:, l] - arr[i][:, l] * arr[j][:, k]
    linear_entropy = 2.0 * float(np.sum(np.abs(minors) ** 2)) / (tr * tr)
    return math.sqrt(2.0 * linear_entropy)


def concurrence_from_spectrum(spectrum: SchmidtSpectrum) -> float:
    """sqrt(2 (1 - sum lambda^4)) using 1 - sum p^2 = 2 sum_{s<t} p_s p_t."""
    p = np.array(spectrum.squared)
    cross = sum(p[s] * p[t] for s in range(len(p)) for t in range(s + 1, len(p)))
    return math.sqrt(4.0 * float(cross))


def entanglement_entropy(spectrum: SchmidtSpectrum) -> float:
    """Shannon entropy of the squared coefficients, in nats."""
    total = 0.0
    for p in spectrum.squared:
        if p > ENTROPY_FLOOR:
            total -= p * math.log(p)
    return max(total, 0.0)


def robustness(spectrum: SchmidtSpectrum) -> float:
    """(sum lambda)^2 - 1, evaluated as 2 sum_{s<t} lambda_s lambda_t."""
    lam = spectrum.lambdas
    return 2.0 * sum(lam[s] * lam[t] for s in range(len(lam)) for t in range(s + 1, len(lam)))


def report(matrix, tolerance: float = DEFAULT_RANK_TOL) -> EntanglementReport:
    spectrum = schmidt_spectrum(matrix, tolerance)
    rank = schmidt_rank(spectrum)
    return EntanglementReport(
        spectrum=spectrum,
        rank=rank,
        concurrence=concurrence(matrix),
        entropy=entanglement_entropy(spectrum),
        robustness=robustness(spectrum),
        entangled=rank > 1,
    )
