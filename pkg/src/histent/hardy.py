"""Hardy's overlapping interferometers.

Electron (particle A) and positron (particle B) each traverse a
Mach-Zehnder interferometer. Mode labels follow the usual figure:
``0`` source, ``1``/``2`` after the first beamsplitter, ``3``/``4`` after
the mirrors, ``5``/``6`` at the detectors. Arm 2 of both interferometers
crosses, so the pairs (a2, b2) and (a4, b4) annihilate.

Removing a final beamsplitter keeps the time step but routes the arms
straight to the detectors: 3 -> 6, 4 -> 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from . import entanglement, histories, weakvalues
from .circuit import Circuit, ModeMap, TimeStep, load_circuit
from .hilbert import TwoParticleState

MODES = 7
R = 1 / math.sqrt(2)

FIRST_SPLITTER = ModeMap({0: [(1, R), (2, 1j * R)]})
MIRRORS = ModeMap({1: [(3, 1j)], 2: [(4, 1j)]})
FINAL_SPLITTER = ModeMap({3: [(5, 1j * R), (6, R)], 4: [(5, R), (6, 1j * R)]})
NO_SPLITTER = ModeMap({3: [(6, 1.0)], 4: [(5, 1.0)]})

POSTSELECTIONS = {"a5b5": (5, 5), "a5b6": (5, 6), "a6b5": (6, 5), "a6b6": (6, 6)}


@dataclass(frozen=True)
class HardyConfig:
    keep_a: bool = True
    keep_b: bool = True

    @property
    def label(self) -> str:
        return f"A{'+' if self.keep_a else '-'}B{'+' if self.keep_b else '-'}"


def build(config: HardyConfig = HardyConfig()) -> Circuit:
    final_a = FINAL_SPLITTER if config.keep_a else NO_SPLITTER
    final_b = FINAL_SPLITTER if config.keep_b else NO_SPLITTER
    steps = (
        TimeStep(FIRST_SPLITTER, FIRST_SPLITTER, frozenset({(2, 2)})),
        TimeStep(MIRRORS, MIRRORS, frozenset({(4, 4)})),
        TimeStep(final_a, final_b),
    )
    return Circuit(
        mode_count_a=MODES,
        mode_count_b=MODES,
        steps=steps,
        initial=TwoParticleState.basis(MODES, MODES, 0, 0),
        intermediate_bases=(((1, 2), (1, 2)), ((3, 4), (3, 4))),
        postselections=POSTSELECTIONS,
        name=f"hardy {config.label}",
    )


def bundled_scenario_text() -> str:
    return resources.files("histent").joinpath("data/hardy.scenario").read_text(encoding="utf-8")


def bundled_scenario_path():
    return resources.files("histent").joinpath("data/hardy.scenario")


def load_bundled() -> Circuit:
    """The shipped scenario file (both final beamsplitters in place)."""
    return load_circuit(bundled_scenario_text())


@dataclass(frozen=True, eq=False)
class PostselectionResult:
    name: str
    final: tuple[int, int]
    propagator: histories.PropagatorMatrix
    entanglement: entanglement.EntanglementReport
    weak_values: weakvalues.WeakValueMatrix | None


@dataclass(frozen=True, eq=False)
class HardyReport:
    config: HardyConfig
    circuit: Circuit
    postselections: tuple[PostselectionResult, ...]
    combined: histories.PropagatorMatrix
    combined_entanglement: entanglement.EntanglementReport
    detection_table: object
    tables: dict
    lhv: object
    no_signalling: bool
    impossible: tuple[str, ...] = ()

    def result(self, name: str) -> PostselectionResult:
        for r in self.postselections:
            if r.name == name:
                return r
        raise KeyError(name)


def analyse_postselection(circuit: Circuit, name: str, tolerance: float = entanglement.DEFAULT_RANK_TOL):
    matrix = histories.propagator_matrix(circuit, name)
    try:
        wv = weakvalues.weak_value_matrix(matrix)
    except weakvalues.UndefinedWeakValueError:
        wv = None
    return PostselectionResult(
        name, circuit.postselection(name), matrix, entanglement.report(matrix, tolerance), wv
    )


def full_report(config: HardyConfig = HardyConfig(), tolerance: float = entanglement.DEFAULT_RANK_TOL) -> HardyReport:
    """Everything for one setting; postselections that never occur go to ``impossible``."""
    from . import nonlocality

    circuit = build(config)
    results, impossible = [], []
    for name in circuit.postselections:
        try:
            results.append(analyse_postselection(circuit, name, tolerance))
        except entanglement.ZeroPropagatorError:
            impossible.append(name)
    combined = histories.combined_matrix(circuit, list(circuit.postselections))
    tables = nonlocality.detection_tables()
    system = nonlocality.build_lhv_system(tables, 6, 6)
    return HardyReport(
        config=config,
        circuit=circuit,
        postselections=tuple(results),
        combined=combined,
        combined_entanglement=entanglement.report(combined, tolerance),
        detection_table=tables[(config.keep_a, config.keep_b)],
        tables=tables,
        lhv=nonlocality.check_feasibility(system),
        no_signalling=nonlocality.no_signalling_check(tables),
        impossible=tuple(impossible),
    )
