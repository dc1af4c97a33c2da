"""Discrete two-particle interferometric circuits.

Each time step applies one linear mode map per particle (beamsplitters,
mirrors, free propagation) and then deletes the amplitude of every listed
annihilation pair. Circuits are plain immutable values and can be loaded
from, or dumped to, a JSON scenario document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import jsonschema
import numpy as np

from .hilbert import Pair, TwoParticleState, squared_norm

ISOMETRY_TOL = 1e-10


class CircuitError(ValueError):
    """A circuit violates one of its structural invariants."""


class ScenarioError(CircuitError):
    """A scenario document could not be turned into a circuit."""


class MissingRuleError(KeyError):
    """An occupied mode has no rule in the step's mode map."""


@dataclass(frozen=True, eq=False)
class ModeMap:
    """Single-particle linear map: source mode -> [(target mode, coefficient), ...]."""

    rules: Mapping[int, tuple[tuple[int, complex], ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {
            int(src): tuple((int(t), complex(c)) for t, c in targets)
            for src, targets in self.rules.items()
        }
        object.__setattr__(self, "rules", MappingProxyType(clean))

    @classmethod
    def identity(cls, modes) -> "ModeMap":
        return cls({m: ((m, 1.0),) for m in modes})

    @property
    def sources(self) -> list[int]:
        return sorted(self.rules)

    @property
    def targets(self) -> list[int]:
        return sorted({t for targets in self.rules.values() for t, _ in targets})

    def matrix(self) -> tuple[np.ndarray, list[int], list[int]]:
        """Dense coefficient matrix, rows = targets, columns = sources."""
        sources, targets = self.sources, self.targets
        row = {t: i for i, t in enumerate(targets)}
        mat = np.zeros((len(targets), len(sources)), dtype=complex)
        for j, src in enumerate(sources):
            for t, c in self.rules[src]:
                mat[row[t], j] += c
        return mat, targets, sources

    def isometry_defect(self) -> float:
        """Max deviation of the column Gram matrix from the identity."""
        mat, _, sources = self.matrix()
        if not sources:
            return 0.0
        gram = mat.conj().T @ mat
        return float(np.max(np.abs(gram - np.eye(len(sources)))))

    def allclose(self, other: "ModeMap", atol: float = 1e-15) -> bool:
        m1, t1, s1 = self.matrix()
        m2, t2, s2 = other.matrix()
        return t1 == t2 and s1 == s2 and np.allclose(m1, m2, rtol=0, atol=atol)


@dataclass(frozen=True, eq=False)
class TimeStep:
    map_a: ModeMap
    map_b: ModeMap
    annihilate: frozenset[Pair] = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self, "annihilate", frozenset((int(a), int(b)) for a, b in self.annihilate)
        )


@dataclass(frozen=True, eq=False)
class Circuit:
    """Preselected two-particle circuit with declared history bases.

    ``intermediate_bases[j]`` holds the A-side and B-side mode lists that
    resolve the identity on the occupied subspace right after ``steps[j]``.
    """

    mode_count_a: int
    mode_count_b: int
    steps: tuple[TimeStep, ...]
    initial: TwoParticleState
    intermediate_bases: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()
    postselections: Mapping[str, Pair] = field(default_factory=dict)
    name: str = "circuit"

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(
            self,
            "intermediate_bases",
            tuple((tuple(map(int, a)), tuple(map(int, b))) for a, b in self.intermediate_bases),
        )
        object.__setattr__(
            self,
            "postselections",
            MappingProxyType({str(k): (int(a), int(b)) for k, (a, b) in self.postselections.items()}),
        )
        for message in _violations(self):
            raise CircuitError(message)

    @property
    def k(self) -> int:
        """Number of intermediate time points."""
        return len(self.intermediate_bases)

    @property
    def n(self) -> int:
        """Effective local dimension at every intermediate time point."""
        return len(self.intermediate_bases[0][0]) if self.intermediate_bases else 0

    def postselection(self, name_or_pair) -> Pair:
        if isinstance(name_or_pair, str):
            try:
                return self.postselections[name_or_pair]
            except KeyError:
                raise KeyError(f"unknown postselection {name_or_pair!r}") from None
        return tuple(name_or_pair)

    def allclose(self, other: "Circuit", atol: float = 1e-15) -> bool:
        return (
            self.mode_count_a == other.mode_count_a
            and self.mode_count_b == other.mode_count_b
            and len(self.steps) == len(other.steps)
            and all(
                s.map_a.allclose(o.map_a, atol)
                and s.map_b.allclose(o.map_b, atol)
                and s.annihilate == o.annihilate
                for s, o in zip(self.steps, other.steps)
            )
            and self.initial.allclose(other.initial, atol)
            and self.intermediate_bases == other.intermediate_bases
            and dict(self.postselections) == dict(other.postselections)
        )


def _violations(c: Circuit):
    """Yield field-locating messages for every broken invariant."""
    if c.initial.dims != (c.mode_count_a, c.mode_count_b):
        yield f"initial: state declared over {c.initial.dims}, circuit over {(c.mode_count_a, c.mode_count_b)}"
    if abs(squared_norm(c.initial) - 1.0) > ISOMETRY_TOL:
        yield f"initial: squared norm {squared_norm(c.initial):.12g} != 1"
    counts = {"A": c.mode_count_a, "B": c.mode_count_b}
    for i, step in enumerate(c.steps):
        for side, mmap in (("A", step.map_a), ("B", step.map_b)):
            where = f"steps[{i}].map{side}"
            for m in mmap.sources + mmap.targets:
                if not 0 <= m < counts[side]:
                    yield f"{where}: mode {m} outside 0..{counts[side] - 1}"
            defect = mmap.isometry_defect()
            if defect > ISOMETRY_TOL:
                mat, _, sources = mmap.matrix()
                norms = ", ".join(
                    f"{s}: {np.linalg.norm(mat[:, j]):.6g}" for j, s in enumerate(sources)
                )
                yield f"{where}: mode map is not isometric (column norms {norms}; defect {defect:.3g})"
        for a, b in sorted(step.annihilate):
            if not (0 <= a < c.mode_count_a and 0 <= b < c.mode_count_b):
                yield f"steps[{i}].annihilate: pair ({a}, {b}) outside mode space"
    if len(c.intermediate_bases) > len(c.steps):
        yield f"intermediateBases: {len(c.intermediate_bases)} time points but only {len(c.steps)} steps"
    sizes = {len(x) for basis in c.intermediate_bases for x in basis}
    if len(sizes) > 1:
        yield f"intermediateBases: all A/B lists must share one length n, got lengths {sorted(sizes)}"
    for j, (ba, bb) in enumerate(c.intermediate_bases):
        for side, modes in (("A", ba), ("B", bb)):
            if len(set(modes)) != len(modes):
                yield f"intermediateBases[{j}].{side}: repeated mode"
            for m in modes:
                if not 0 <= m < counts[side]:
                    yield f"intermediateBases[{j}].{side}: mode {m} outside 0..{counts[side] - 1}"
    for name, (a, b) in c.postselections.items():
        if not (0 <= a < c.mode_count_a and 0 <= b < c.mode_count_b):
            yield f"postselections[{name}]: pair ({a}, {b}) outside mode space"


def apply_step(state: TwoParticleState, step: TimeStep) -> TwoParticleState:
    """Apply ``map_a (x) map_b`` and then zero the annihilation pairs."""
    out: dict[Pair, complex] = {}
    for (a, b), amp in state:
        try:
            rules_a = step.map_a.rules[a]
        except KeyError:
            raise MissingRuleError(f"no rule for occupied mode a{a}") from None
        try:
            rules_b = step.map_b.rules[b]
        except KeyError:
            raise MissingRuleError(f"no rule for occupied mode b{b}") from None
        for ta, ca in rules_a:
            for tb, cb in rules_b:
                out[(ta, tb)] = out.get((ta, tb), 0j) + amp * ca * cb
    for pair in step.annihilate:
        out.pop(pair, None)
    return TwoParticleState(state.mode_count_a, state.mode_count_b, out)


def evolve(circuit: Circuit) -> list[TwoParticleState]:
    """States at every time point, starting with the initial state."""
    states = [circuit.initial]
    for step in circuit.steps:
        states.append(apply_step(states[-1], step))
    return states


def lost_probability(circuit: Circuit) -> float:
    """Norm removed by annihilation over the whole evolution."""
    return 1.0 - squared_norm(evolve(circuit)[-1])


# --- scenario documents -----------------------------------------------------

_COEFF = {
    "type": "object",
    "properties": {
        "to": {"type": "integer", "minimum": 0},
        "re": {"type": "number"},
        "im": {"type": "number"},
    },
    "required": ["to"],
    "additionalProperties": False,
}
_MAP = {
    "type": "object",
    "patternProperties": {"^[0-9]+$": {"type": "array", "items": _COEFF, "minItems": 1}},
    "additionalProperties": False,
}
_PAIR = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}
_MODES = {"type": "array", "items": {"type": "integer", "minimum": 0}}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "modeCountA": {"type": "integer", "minimum": 1},
        "modeCountB": {"type": "integer", "minimum": 1},
        "initial": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "a": {"type": "integer", "minimum": 0},
                    "b": {"type": "integer", "minimum": 0},
                    "re": {"type": "number"},
                    "im": {"type": "number"},
                },
                "required": ["a", "b"],
                "additionalProperties": False,
            },
        },
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "mapA": _MAP,
                    "mapB": _MAP,
                    "annihilate": {"type": "array", "items": _PAIR},
                },
                "required": ["mapA", "mapB"],
                "additionalProperties": False,
            },
        },
        "intermediateBases": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"A": _MODES, "B": _MODES},
                "required": ["A", "B"],
                "additionalProperties": False,
            },
        },
        "postselections": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string"},
                    "a": {"type": "integer", "minimum": 0},
                    "b": {"type": "integer", "minimum": 0},
                },
                "required": ["name", "a", "b"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["modeCountA", "modeCountB", "initial", "steps"],
    "additionalProperties": False,
}


def _json_path(path: Sequence) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<document>"


def _complex(entry: Mapping) -> complex:
    return complex(entry.get("re", 0.0), entry.get("im", 0.0))


def _mode_map(doc: Mapping) -> ModeMap:
    return ModeMap({int(src): [(e["to"], _complex(e)) for e in targets] for src, targets in doc.items()})


def load_circuit(text: str) -> Circuit:
    """Parse and validate a JSON scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise ScenarioError(f"{_json_path(error.absolute_path)}: {error.message}")

    na, nb = doc["modeCountA"], doc["modeCountB"]
    for i, term in enumerate(doc["initial"]):
        if term["a"] >= na or term["b"] >= nb:
            raise ScenarioError(f"initial[{i}]: pair ({term['a']}, {term['b']}) outside mode space")
    initial = TwoParticleState(na, nb, {(t["a"], t["b"]): _complex(t) for t in doc["initial"]})
    steps = [
        TimeStep(_mode_map(s["mapA"]), _mode_map(s["mapB"]), frozenset(map(tuple, s.get("annihilate", []))))
        for s in doc["steps"]
    ]
    bases = [(b["A"], b["B"]) for b in doc.get("intermediateBases", [])]
    posts = {}
    for i, p in enumerate(doc.get("postselections", [])):
        if p["name"] in posts:
            raise ScenarioError(f"postselections[{i}].name: duplicate name {p['name']!r}")
        posts[p["name"]] = (p["a"], p["b"])
    try:
        return Circuit(na, nb, steps, initial, bases, posts, doc.get("name", "scenario"))
    except CircuitError as exc:
        raise ScenarioError(str(exc)) from exc


def load_circuit_file(path) -> Circuit:
    return load_circuit(Path(path).read_text(encoding="utf-8"))


def dump_circuit(circuit: Circuit) -> str:
    """Serialize to the scenario format; ``load_circuit`` inverts this."""

    def coeff(c: complex) -> dict:
        return {"re": c.real, "im": c.imag}

    def mmap(m: ModeMap) -> dict:
        return {str(s): [{"to": t, **coeff(c)} for t, c in m.rules[s]] for s in m.sources}

    doc = {
        "name": circuit.name,
        "modeCountA": circuit.mode_count_a,
        "modeCountB": circuit.mode_count_b,
        "initial": [{"a": a, "b": b, **coeff(amp)} for (a, b), amp in sorted(circuit.initial)],
        "steps": [
            {"mapA": mmap(s.map_a), "mapB": mmap(s.map_b), "annihilate": [list(p) for p in sorted(s.annihilate)]}
            for s in circuit.steps
        ],
        "intermediateBases": [{"A": list(a), "B": list(b)} for a, b in circuit.intermediate_bases],
        "postselections": [{"name": k, "a": a, "b": b} for k, (a, b) in circuit.postselections.items()],
    }
    return json.dumps(doc, indent=2)
