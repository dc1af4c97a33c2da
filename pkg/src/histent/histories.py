"""Separable bipartite histories and their Feynman propagators.

A local history of one particle picks one mode from the declared basis at
every intermediate time point. Its multi-index ``(i_1, ..., i_k)`` (1-based)
is flattened with the earliest time varying fastest::

    alpha = 1 + sum_j (i_j - 1) * n**(j - 1)

The propagator of a bipartite history is obtained by running the circuit,
projecting onto the history's mode pair after every intermediate step, and
overlapping the result with the postselected pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, apply_step
from .hilbert import Pair, project


def alpha_index(multi: Sequence[int], n: int) -> int:
    for j, i in enumerate(multi):
        if not 1 <= i <= n:
            raise IndexError(f"component {j} of multi-index is {i}, expected 1..{n}")
    return 1 + sum((i - 1) * n**j for j, i in enumerate(multi))


def multi_index(alpha: int, n: int, k: int) -> tuple[int, ...]:
    if not 1 <= alpha <= n**k:
        raise IndexError(f"alpha={alpha} outside 1..{n**k}")
    rest, out = alpha - 1, []
    for _ in range(k):
        rest, digit = divmod(rest, n)
        out.append(digit + 1)
    return tuple(out)


@dataclass(frozen=True)
class HistoryIndex:
    multi: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "multi", tuple(self.multi))
        alpha_index(self.multi, self.n)

    @classmethod
    def from_alpha(cls, alpha: int, n: int, k: int) -> "HistoryIndex":
        return cls(multi_index(alpha, n, k), n)

    @property
    def alpha(self) -> int:
        return alpha_index(self.multi, self.n)

    @property
    def k(self) -> int:
        return len(self.multi)


@dataclass(frozen=True)
class BipartiteHistory:
    alpha: HistoryIndex
    beta: HistoryIndex

    def __post_init__(self):
        if self.alpha.k != self.beta.k:
            raise ValueError(f"local histories span {self.alpha.k} and {self.beta.k} time points")


@dataclass(frozen=True, eq=False)
class PropagatorMatrix:
    """Matrix of propagators, rows = particle-A histories, columns = particle-B histories.

    ``row_paths``/``col_paths`` give, for every row/column, the mode visited at
    each time point of that local history.
    """

    entries: np.ndarray
    row_paths: tuple[tuple[int, ...], ...]
    col_paths: tuple[tuple[int, ...], ...]
    initial: str = ""
    final: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if entries.shape != (len(self.row_paths), len(self.col_paths)):
            raise ValueError(
                f"entries shape {entries.shape} does not match "
                f"{len(self.row_paths)} row and {len(self.col_paths)} column histories"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def row_labels(self) -> list[str]:
        return [".".join(f"a{m}" for m in p) for p in self.row_paths]

    @property
    def col_labels(self) -> list[str]:
        return [".".join(f"b{m}" for m in p) for p in self.col_paths]

    @property
    def trace_gram(self) -> float:
        """Tr(C C^dagger), the total postselected history weight."""
        return float(np.sum(np.abs(self.entries) ** 2))

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def _local_paths(circuit: Circuit, side: int) -> list[tuple[int, ...]]:
    """Mode sequence of every local history, in alpha order."""
    n, k = circuit.n, circuit.k
    return [
        tuple(circuit.intermediate_bases[j][side][i - 1] for j, i in enumerate(multi_index(alpha, n, k)))
        for alpha in range(1, n**k + 1)
    ]


def _allowed(circuit: Circuit, side: int, path: tuple[int, ...]) -> bool:
    """Whether the single-particle dynamics can connect the modes of ``path``."""
    start = circuit.initial.modes_a() if side == 0 else circuit.initial.modes_b()
    current = set(start)
    for j, mode in enumerate(path):
        mmap = circuit.steps[j].map_a if side == 0 else circuit.steps[j].map_b
        reachable = {t for src in current for t, c in mmap.rules.get(src, ()) if c != 0}
        if mode not in reachable:
            return False
        current = {mode}
    return True


def chain_apply(circuit: Circuit, history: BipartiteHistory, final_pair: Pair) -> complex:
    """Propagator <final| K_history |initial> for one bipartite history."""
    if history.alpha.n != circuit.n or history.alpha.k != circuit.k or history.beta.n != circuit.n:
        raise IndexError(f"history does not fit circuit bases (n={circuit.n}, k={circuit.k})")
    state = circuit.initial
    for j, (basis_a, basis_b) in enumerate(circuit.intermediate_bases):
        state = apply_step(state, circuit.steps[j])
        state = project(state, (basis_a[history.alpha.multi[j] - 1], basis_b[history.beta.multi[j] - 1]))
        if not len(state):
            return 0j
    for step in circuit.steps[circuit.k :]:
        state = apply_step(state, step)
    return state[tuple(final_pair)]


def _pair_label(pair: Pair) -> str:
    return f"a{pair[0]}b{pair[1]}"


def propagator_matrix(circuit: Circuit, final, prune: bool = True) -> PropagatorMatrix:
    """Propagator complex coefficient matrix for one postselected pair.

    With ``prune`` (the default) local histories that the single-particle
    mode maps can never realize are left out, so the matrix is indexed by the
    dynamically allowed histories only (2x2 for Hardy). ``prune=False`` gives
    the full ``n**k x n**k`` matrix; the two differ only by zero rows and
    columns and have the same Schmidt spectrum.
    """
    final_pair = circuit.postselection(final)
    n, k = circuit.n, circuit.k
    if k == 0:
        raise ValueError("circuit declares no intermediate bases")
    paths_a, paths_b = _local_paths(circuit, 0), _local_paths(circuit, 1)
    rows = list(range(1, n**k + 1))
    cols = list(rows)
    if prune:
        rows = [al for al in rows if _allowed(circuit, 0, paths_a[al - 1])]
        cols = [be for be in cols if _allowed(circuit, 1, paths_b[be - 1])]
    entries = np.zeros((len(rows), len(cols)), dtype=complex)
    for r, al in enumerate(rows):
        for c, be in enumerate(cols):
            history = BipartiteHistory(HistoryIndex.from_alpha(al, n, k), HistoryIndex.from_alpha(be, n, k))
            entries[r, c] = chain_apply(circuit, history, final_pair)
    return PropagatorMatrix(
        entries,
        tuple(paths_a[al - 1] for al in rows),
        tuple(paths_b[be - 1] for be in cols),
        initial=" + ".join(_pair_label(p) for p, _ in sorted(circuit.initial)),
        final=_pair_label(final_pair),
        meta={"n": n, "k": k, "alphas": rows, "betas": cols, "pruned": prune},
    )


def combined_matrix(circuit: Circuit, finals, prune: bool = True) -> PropagatorMatrix:
    """Block-assemble per-final matrices into one over extended histories.

    The final local outcome is appended as one more time point, slower than
    every intermediate one, so for two histories and finals {5, 6} the index
    order is (1,5), (2,5), (1,6), (2,6). Final pairs absent from ``finals``
    contribute zero blocks.
    """
    pairs = [circuit.postselection(f) for f in finals]
    if not pairs:
        raise ValueError("finals must be nonempty")
    outs_a = sorted({a for a, _ in pairs})
    outs_b = sorted({b for _, b in pairs})
    blocks = {pair: propagator_matrix(circuit, pair, prune=prune) for pair in pairs}
    first = next(iter(blocks.values()))
    ra, cb = first.shape
    entries = np.zeros((ra * len(outs_a), cb * len(outs_b)), dtype=complex)
    for (a, b), block in blocks.items():
        i, j = outs_a.index(a), outs_b.index(b)
        entries[i * ra : (i + 1) * ra, j * cb : (j + 1) * cb] = block.entries
    row_paths = tuple(p + (a,) for a in outs_a for p in first.row_paths)
    col_paths = tuple(p + (b,) for b in outs_b for p in first.col_paths)
    return PropagatorMatrix(
        entries,
        row_paths,
        col_paths,
        initial=first.initial,
        final=", ".join(_pair_label(p) for p in pairs),
        meta={**first.meta, "finals": [_pair_label(p) for p in pairs]},
    )


def sum_over_histories(matrix) -> complex:
    return complex(np.sum(np.asarray(matrix, dtype=complex)))


def all_histories(n: int, k: int):
    """Every bipartite history for local dimension ``n`` over ``k`` time points."""
    for al, be in itertools.product(range(1, n**k + 1), repeat=2):
        yield BipartiteHistory(HistoryIndex.from_alpha(al, n, k), HistoryIndex.from_alpha(be, n, k))
