"""Detection statistics and the local-hidden-variable test for Hardy's setup.

The local model gives the electron a weight ``x<arm><setting>`` to reach the
target detector, depending only on the arm it came from and its own final
beamsplitter setting, and likewise ``y<arm><setting>`` for the positron.
Matching quantum zero/nonzero detection patterns yields a system of
constraints on sums of nonnegative products. :func:`check_feasibility`
decides it by logical propagation over the zero pattern only, and records
every deduction so the contradiction can be replayed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

from .circuit import Circuit, ModeMap, TimeStep, apply_step
from .hilbert import Mode, Pair, Particle, TwoParticleState

PROB_TOL = 1e-10
POSITIVE_THRESHOLD = 1e-9
MAX_WITNESS_VARIABLES = 20

SETTINGS = ((True, True), (True, False), (False, True), (False, False))


def case_label(keep_a: bool, keep_b: bool) -> str:
    return f"A{'+' if keep_a else '-'}B{'+' if keep_b else '-'}"


class UndefinedConditionalError(ZeroDivisionError):
    """Conditioning on an event of zero probability."""


@dataclass(frozen=True, eq=False)
class DetectionTable:
    label: str
    joint: Mapping[Pair, float]
    outcomes_a: tuple[int, ...]
    outcomes_b: tuple[int, ...]

    def __post_init__(self):
        joint = {(a, b): float(self.joint.get((a, b), 0.0)) for a in self.outcomes_a for b in self.outcomes_b}
        object.__setattr__(self, "joint", MappingProxyType(joint))

    @property
    def unconditional_a(self) -> dict[int, float]:
        return {a: sum(self.joint[(a, b)] for b in self.outcomes_b) for a in self.outcomes_a}

    @property
    def unconditional_b(self) -> dict[int, float]:
        return {b: sum(self.joint[(a, b)] for a in self.outcomes_a) for b in self.outcomes_b}

    @property
    def total(self) -> float:
        return sum(self.joint.values())

    @property
    def annihilated(self) -> float:
        return 1.0 - self.total


def table_from_state(state: TwoParticleState, outcomes_a, outcomes_b, label: str = "") -> DetectionTable:
    joint = {(a, b): abs(state[(a, b)]) ** 2 for a in outcomes_a for b in outcomes_b}
    return DetectionTable(label, joint, tuple(outcomes_a), tuple(outcomes_b))


def _outcomes(circuit: Circuit, side: int, stop_step: int | None = None) -> tuple[int, ...]:
    steps = circuit.steps
    if stop_step is not None and stop_step < len(steps):
        mmap = steps[stop_step].map_a if side == 0 else steps[stop_step].map_b
        return tuple(mmap.sources)
    if steps:
        mmap = steps[-1].map_a if side == 0 else steps[-1].map_b
        return tuple(mmap.targets)
    return tuple(circuit.initial.modes_a() if side == 0 else circuit.initial.modes_b())


def circuit_table(circuit: Circuit, label: str = "") -> DetectionTable:
    """Joint detection probabilities at the output ports of ``circuit``."""
    return mid_circuit_table(circuit, Particle.A, len(circuit.steps), label or circuit.name)


def mid_circuit_table(circuit: Circuit, stop_particle, stop_step: int, label: str = "") -> DetectionTable:
    """Detect ``stop_particle`` just before ``steps[stop_step]``; the other runs to the end.

    The halted particle is held in place by identity maps, and annihilation
    is switched off from ``stop_step`` on because it no longer reaches the
    crossing.
    """
    stop = Particle(getattr(stop_particle, "value", stop_particle))
    if not 0 <= stop_step <= len(circuit.steps):
        raise ValueError(f"stop_step {stop_step} outside 0..{len(circuit.steps)}")
    state = circuit.initial
    for j, step in enumerate(circuit.steps):
        if j >= stop_step:
            if stop is Particle.A:
                step = TimeStep(ModeMap.identity(state.modes_a()), step.map_b)
            else:
                step = TimeStep(step.map_a, ModeMap.identity(state.modes_b()))
        state = apply_step(state, step)
    side = 0 if stop is Particle.A else 1
    outs = {side: _outcomes(circuit, side, stop_step), 1 - side: _outcomes(circuit, 1 - side)}
    return table_from_state(state, outs[0], outs[1], label)


def detection_table(keep_a: bool, keep_b: bool) -> DetectionTable:
    from .hardy import HardyConfig, build

    return circuit_table(build(HardyConfig(keep_a, keep_b)), case_label(keep_a, keep_b))


def detection_tables() -> dict[tuple[bool, bool], DetectionTable]:
    """Hardy detection tables for all four beamsplitter settings."""
    return {s: detection_table(*s) for s in SETTINGS}


def conditional_probability(table, target: Mode, given: Mode) -> float:
    """P(target | given) for modes of different particles."""
    if target.particle == given.particle:
        raise ValueError("target and given must belong to different particles")
    if isinstance(table, DetectionTable):
        joint, outs_a, outs_b = table.joint, table.outcomes_a, table.outcomes_b
    else:
        joint = table
        outs_a = sorted({a for a, _ in joint})
        outs_b = sorted({b for _, b in joint})

    def p(a, b):
        return joint.get((a, b), 0.0)

    if given.particle is Particle.A:
        num = p(given.index, target.index)
        den = sum(p(given.index, b) for b in outs_b)
    else:
        num = p(target.index, given.index)
        den = sum(p(a, given.index) for a in outs_a)
    if den <= POSITIVE_THRESHOLD:
        raise UndefinedConditionalError(f"P({given}) = {den:.3g}; conditional undefined")
    return num / den


# --- local hidden variable system --------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """``weight * sum(prod(term))`` is either ``== 0`` or ``> 0``."""

    id: str
    terms: tuple[tuple[str, ...], ...]
    positive: bool
    weight: float = 1.0

    def __str__(self) -> str:
        body = " + ".join("*".join(t) for t in self.terms)
        scale = "" if self.weight == 1.0 else f"{self.weight:g}*"
        return f"{self.id}: {scale}({body}) {'> 0' if self.positive else '= 0'}"

    def value(self, assignment: Mapping[str, float]) -> float:
        total = 0.0
        for term in self.terms:
            prod = 1.0
            for v in term:
                prod *= assignment[v]
            total += prod
        return self.weight * total

    def satisfied(self, assignment: Mapping[str, float]) -> bool:
        val = self.value(assignment)
        return val > 0 if self.positive else val == 0


@dataclass(frozen=True)
class LHVSystem:
    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        known = set(self.variables)
        for c in self.constraints:
            for term in c.terms:
                missing = set(term) - known
                if missing:
                    raise ValueError(f"constraint {c.id} uses undeclared variables {sorted(missing)}")

    @classmethod
    def from_constraints(cls, constraints: Sequence[Constraint]) -> "LHVSystem":
        seen: dict[str, None] = {}
        for c in constraints:
            for term in c.terms:
                seen.update(dict.fromkeys(term))
        return cls(tuple(seen), tuple(constraints))

    @property
    def zero_constraints(self) -> list[Constraint]:
        return [c for c in self.constraints if not c.positive]

    @property
    def nonzero_constraints(self) -> list[Constraint]:
        return [c for c in self.constraints if c.positive]

    def constraint(self, cid: str) -> Constraint:
        for c in self.constraints:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def satisfied_by(self, assignment: Mapping[str, float]) -> bool:
        if any(assignment[v] < 0 for v in self.variables):
            return False
        return all(c.satisfied(assignment) for c in self.constraints)


def _var(particle: str, arm: int, keep: bool) -> str:
    return f"{particle}{arm}{'+' if keep else '-'}"


def lhv_variables(arms=(1, 2)) -> tuple[str, ...]:
    return tuple(_var(p, arm, keep) for p in "xy" for keep in (True, False) for arm in arms)


def build_lhv_system(
    tables,
    target_a: int,
    target_b: int,
    arms: Sequence[int] = (1, 2),
    excluded: Sequence[tuple[int, int]] = ((2, 2),),
    weight: float = 0.25,
) -> LHVSystem:
    """Local-model constraints reproducing the zero pattern of four tables.

    ``tables`` maps ``(keep_a, keep_b)`` to a :class:`DetectionTable` (a
    sequence is read in ``SETTINGS`` order). Joint constraints get ids
    l1-l4 by setting; single-particle constraints are l5/l6 for the
    electron kept/removed and l7/l8 for the positron.
    """
    if not isinstance(tables, Mapping):
        tables = dict(zip(SETTINGS, tables))
    if not tables:
        return LHVSystem((), ())
    constraints = []
    arm_pairs = [(i, j) for i in arms for j in arms if (i, j) not in set(map(tuple, excluded))]
    for n, setting in enumerate(SETTINGS, start=1):
        if setting not in tables:
            continue
        keep_a, keep_b = setting
        p = tables[setting].joint.get((target_a, target_b), 0.0)
        terms = tuple((_var("x", i, keep_a), _var("y", j, keep_b)) for i, j in arm_pairs)
        constraints.append(Constraint(f"l{n}", terms, p > POSITIVE_THRESHOLD, weight))
    marginals = (
        ("l5", "x", True, lambda t: t.unconditional_a.get(target_a, 0.0), 0),
        ("l6", "x", False, lambda t: t.unconditional_a.get(target_a, 0.0), 0),
        ("l7", "y", True, lambda t: t.unconditional_b.get(target_b, 0.0), 1),
        ("l8", "y", False, lambda t: t.unconditional_b.get(target_b, 0.0), 1),
    )
    for cid, name, keep, prob, side in marginals:
        relevant = [t for s, t in tables.items() if s[side] == keep]
        if not relevant:
            continue
        positive = max(prob(t) for t in relevant) > POSITIVE_THRESHOLD
        constraints.append(Constraint(cid, tuple((_var(name, arm, keep),) for arm in arms), positive))
    return LHVSystem(lhv_variables(arms), tuple(constraints))


@dataclass(frozen=True)
class Deduction:
    variable: str
    sources: tuple[str, ...]
    depends: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.variable}=0 (from {','.join(self.sources)})"


@dataclass(frozen=True)
class FeasibilityVerdict:
    status: str
    forced_zero: tuple[str, ...]
    deductions: tuple[Deduction, ...]
    chain: tuple[Deduction, ...] = ()
    contradicted_constraint: str | None = None
    witness: Mapping[str, float] | None = field(default=None)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def summary(self) -> str:
        if self.status == "infeasible":
            steps = "; ".join(str(d) for d in self.chain)
            prefix = f"{steps}; " if steps else ""
            return f"INFEASIBLE: {prefix}contradiction at {self.contradicted_constraint}"
        if self.status == "feasible":
            values = ", ".join(f"{k}={v:g}" for k, v in self.witness.items())
            return f"FEASIBLE: witness {values}"
        return "UNDETERMINED: no contradiction derived and no witness found"


def _term_key(term) -> frozenset:
    return frozenset(term)


def _propagate(system: LHVSystem):
    """Fixpoint of the zero-forcing rules; returns (forced, zero_terms)."""
    zero_terms: dict[frozenset, str] = {}
    forced: dict[str, Deduction] = {}
    for c in system.zero_constraints:
        for term in c.terms:
            zero_terms.setdefault(_term_key(term), c.id)
            if len(set(term)) == 1 and term[0] not in forced:
                forced[term[0]] = Deduction(term[0], (c.id,))
    linear = [c for c in system.nonzero_constraints if all(len(t) == 1 for t in c.terms)]
    changed = True
    while changed:
        changed = False
        for u in system.variables:
            if u in forced:
                continue
            for c in linear:
                members = [t[0] for t in c.terms]
                if u in members:
                    continue
                covered = [v for v in members if _term_key((u, v)) in zero_terms]
                depends = tuple(v for v in members if v not in covered)
                if covered and all(v in forced for v in depends):
                    sources = tuple(dict.fromkeys(zero_terms[_term_key((u, v))] for v in covered)) + (c.id,)
                    forced[u] = Deduction(u, sources, depends)
                    changed = True
                    break
    return forced, zero_terms


def _term_is_zero(term, forced, zero_terms) -> bool:
    return _term_key(term) in zero_terms or any(v in forced for v in term)


def _search_witness(system: LHVSystem, forced) -> dict[str, float] | None:
    # Only the support matters: any nonnegative solution stays a solution
    # after rescaling its positive entries to 1.
    free = [v for v in system.variables if v not in forced]
    if len(free) > MAX_WITNESS_VARIABLES:
        return None
    for r in range(len(free) + 1):
        for zeros in itertools.combinations(free, r):
            assignment = {v: 0.0 if (v in forced or v in zeros) else 1.0 for v in system.variables}
            if system.satisfied_by(assignment):
                return assignment
    return None


def check_feasibility(system: LHVSystem) -> FeasibilityVerdict:
    forced, zero_terms = _propagate(system)
    deductions = tuple(forced.values())
    order = {d.variable: i for i, d in enumerate(deductions)}
    for c in system.nonzero_constraints:
        if all(_term_is_zero(t, forced, zero_terms) for t in c.terms):
            needed: set[str] = set()
            for term in c.terms:
                if _term_key(term) not in zero_terms:
                    needed.add(min((v for v in term if v in forced), key=order.__getitem__))
            stack = list(needed)
            while stack:
                for dep in forced[stack.pop()].depends:
                    if dep not in needed:
                        needed.add(dep)
                        stack.append(dep)
            chain = tuple(d for d in deductions if d.variable in needed)
            return FeasibilityVerdict("infeasible", tuple(forced), deductions, chain, c.id)
    witness = _search_witness(system, forced)
    status = "feasible" if witness is not None else "undetermined"
    return FeasibilityVerdict(status, tuple(forced), deductions, witness=witness)


def replay_chain(system: LHVSystem, verdict: FeasibilityVerdict) -> bool:
    """Re-derive an infeasibility verdict using only its recorded chain.

    Each deduction must follow from its cited constraints and the variables
    forced before it, and the contradicted constraint must then have every
    term vanish.
    """
    if verdict.status != "infeasible":
        return False
    forced: set[str] = set()
    for d in verdict.chain:
        *zero_ids, nonzero_id = d.sources
        zero_keys = {_term_key(t) for cid in zero_ids for t in system.constraint(cid).terms}
        if not zero_ids:
            return False
        nz = system.constraint(nonzero_id)
        if not nz.positive or not nz.terms or any(len(t) != 1 for t in nz.terms):
            return False
        members = [t[0] for t in nz.terms]
        if not all(_term_key((d.variable, v)) in zero_keys or v in forced for v in members):
            return False
        forced.add(d.variable)
    target = system.constraint(verdict.contradicted_constraint)
    all_zero_terms = {_term_key(t) for c in system.zero_constraints for t in c.terms}
    return target.positive and all(
        _term_key(t) in all_zero_terms or any(v in forced for v in t) for t in target.terms
    )


def no_signalling_check(tables, tol: float = PROB_TOL) -> bool:
    """Each side's single-particle statistics ignore the distant setting."""
    if not isinstance(tables, Mapping):
        tables = dict(zip(SETTINGS, tables))

    def same(dicts) -> bool:
        dicts = list(dicts)
        keys = set().union(*dicts) if dicts else set()
        return all(abs(d.get(k, 0.0) - dicts[0].get(k, 0.0)) <= tol for d in dicts for k in keys)

    for keep in (True, False):
        if not same(t.unconditional_a for s, t in tables.items() if s[0] == keep):
            return False
        if not same(t.unconditional_b for s, t in tables.items() if s[1] == keep):
            return False
    return True
