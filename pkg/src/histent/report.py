"""Machine-readable (JSON) and human-readable renderings of results."""

from __future__ import annotations

from fractions import Fraction

from .circuit import Circuit
from .entanglement import EntanglementReport
from .histories import PropagatorMatrix
from .nonlocality import DetectionTable, FeasibilityVerdict, LHVSystem
from .weakvalues import WeakValueMatrix

FRACTION_TOL = 1e-10
MAX_DENOMINATOR = 100

_COMPLEX = {
    "type": "object",
    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
    "required": ["re", "im"],
    "additionalProperties": False,
}
_MATRIX = {
    "type": "object",
    "properties": {
        "shape": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "rows": {"type": "array", "items": {"type": "string"}},
        "cols": {"type": "array", "items": {"type": "string"}},
        "entries": {"type": "array", "items": _COMPLEX},
        "initial": {"type": "string"},
        "final": {"type": "string"},
        "traceGram": {"type": "number"},
    },
    "required": ["shape", "rows", "cols", "entries", "traceGram"],
}
_MEASURES = {
    "spectrum": {"type": "array", "items": {"type": "number", "minimum": 0}},
    "squaredSpectrum": {"type": "array", "items": {"type": "number"}},
    "rank": {"type": "integer", "minimum": 0},
    "concurrence": {"type": "number", "minimum": 0},
    "entropy": {"type": "number", "minimum": 0},
    "robustness": {"type": "number", "minimum": 0},
    "entangled": {"type": "boolean"},
}
_WEAK = {
    "oneOf": [
        {"type": "null"},
        {
            "type": "object",
            "properties": {
                "shape": _MATRIX["properties"]["shape"],
                "entries": {"type": "array", "items": _COMPLEX},
                "denominator": _COMPLEX,
            },
            "required": ["shape", "entries", "denominator"],
        },
    ]
}
_BLOCK = {
    "type": "object",
    "properties": {"name": {"type": "string"}, "propagator": _MATRIX, "weakValues": _WEAK, **_MEASURES},
    "required": ["name", "propagator", "weakValues", *_MEASURES],
}
_PROB = {"type": "number", "minimum": 0, "maximum": 1}
_TABLE = {
    "type": "object",
    "properties": {
        "case": {"type": "string"},
        "joint": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"a": {"type": "integer"}, "b": {"type": "integer"}, "p": _PROB},
                "required": ["a", "b", "p"],
            },
        },
        "unconditionalA": {"type": "object", "additionalProperties": _PROB},
        "unconditionalB": {"type": "object", "additionalProperties": _PROB},
        "annihilated": {"type": "number"},
    },
    "required": ["case", "joint", "unconditionalA", "unconditionalB"],
}
_VERDICT = {
    "type": "object",
    "properties": {
        "status": {"enum": ["feasible", "infeasible", "undetermined"]},
        "feasible": {"type": "boolean"},
        "forcedZero": {"type": "array", "items": {"type": "string"}},
        "deductions": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "variable": {"type": "string"},
                    "constraints": {"type": "array", "items": {"type": "string"}},
                },
                "required": ["variable", "constraints"],
            },
        },
        "chain": {"type": "array"},
        "contradictedConstraint": {"type": ["string", "null"]},
        "witness": {"type": ["object", "null"]},
        "summary": {"type": "string"},
    },
    "required": ["status", "feasible", "forcedZero", "deductions", "contradictedConstraint"],
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "kind": {"enum": ["hardy", "run", "nonlocality"]},
        "scenario": {"type": "object"},
        "postselections": {"type": "array", "items": _BLOCK},
        "impossiblePostselections": {"type": "array", "items": {"type": "string"}},
        "combined": {"oneOf": [{"type": "null"}, _BLOCK]},
        "detectionTable": {"oneOf": [{"type": "null"}, _TABLE]},
        "tables": {"type": "array", "items": _TABLE},
        "constraints": {"type": "array", "items": {"type": "string"}},
        "lhv": {"oneOf": [{"type": "null"}, _VERDICT]},
        "noSignalling": {"type": ["boolean", "null"]},
    },
    "required": ["kind", "scenario"],
}


def cplx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def matrix_doc(m: PropagatorMatrix) -> dict:
    return {
        "shape": list(m.shape),
        "rows": m.row_labels,
        "cols": m.col_labels,
        "entries": [cplx(z) for z in m.entries.ravel()],
        "initial": m.initial,
        "final": m.final,
        "traceGram": m.trace_gram,
    }


def weak_doc(w: WeakValueMatrix | None) -> dict | None:
    if w is None:
        return None
    return {
        "shape": list(w.entries.shape),
        "entries": [cplx(z) for z in w.entries.ravel()],
        "denominator": cplx(w.denominator),
    }


def measures_doc(r: EntanglementReport) -> dict:
    return {
        "spectrum": list(r.spectrum.lambdas),
        "squaredSpectrum": list(r.spectrum.squared),
        "rank": r.rank,
        "concurrence": r.concurrence,
        "entropy": r.entropy,
        "robustness": r.robustness,
        "entangled": r.entangled,
    }


def block_doc(name: str, matrix: PropagatorMatrix, ent: EntanglementReport, weak=None) -> dict:
    return {"name": name, "propagator": matrix_doc(matrix), "weakValues": weak_doc(weak), **measures_doc(ent)}


def table_doc(t: DetectionTable) -> dict:
    return {
        "case": t.label,
        "joint": [{"a": a, "b": b, "p": p} for (a, b), p in t.joint.items()],
        "unconditionalA": {f"a{m}": p for m, p in t.unconditional_a.items()},
        "unconditionalB": {f"b{m}": p for m, p in t.unconditional_b.items()},
        "annihilated": t.annihilated,
    }


def verdict_doc(v: FeasibilityVerdict) -> dict:
    def ded(d):
        return {"variable": d.variable, "constraints": list(d.sources)}

    return {
        "status": v.status,
        "feasible": v.feasible,
        "forcedZero": list(v.forced_zero),
        "deductions": [ded(d) for d in v.deductions],
        "chain": [ded(d) for d in v.chain],
        "contradictedConstraint": v.contradicted_constraint,
        "witness": dict(v.witness) if v.witness is not None else None,
        "summary": v.summary(),
    }


def scenario_doc(circuit: Circuit, **extra) -> dict:
    return {
        "name": circuit.name,
        "modeCountA": circuit.mode_count_a,
        "modeCountB": circuit.mode_count_b,
        "steps": len(circuit.steps),
        "n": circuit.n,
        "k": circuit.k,
        "intermediateBases": [{"A": list(a), "B": list(b)} for a, b in circuit.intermediate_bases],
        **extra,
    }


def hardy_doc(rep) -> dict:
    return {
        "kind": "hardy",
        "scenario": scenario_doc(rep.circuit, settings={"keepA": rep.config.keep_a, "keepB": rep.config.keep_b}),
        "postselections": [block_doc(r.name, r.propagator, r.entanglement, r.weak_values) for r in rep.postselections],
        "impossiblePostselections": list(rep.impossible),
        "combined": block_doc("combined", rep.combined, rep.combined_entanglement),
        "detectionTable": table_doc(rep.detection_table),
        "lhv": verdict_doc(rep.lhv),
        "noSignalling": rep.no_signalling,
    }


def nonlocality_doc(tables, system: LHVSystem, verdict: FeasibilityVerdict, no_signalling: bool) -> dict:
    return {
        "kind": "nonlocality",
        "scenario": {"name": "hardy", "target": "a6b6"},
        "tables": [table_doc(t) for t in tables.values()],
        "constraints": [str(c) for c in system.constraints],
        "lhv": verdict_doc(verdict),
        "noSignalling": no_signalling,
    }


# --- human-readable ---------------------------------------------------------


def fmt_real(x: float) -> str:
    x = float(x)
    if abs(x) < 1e-15:
        x = 0.0
    text = f"{x:.6g}"
    frac = _fraction(x)
    if frac is not None:
        text += f" ({frac})"
    return text


def _fraction(x: float) -> Fraction | None:
    frac = Fraction(x).limit_denominator(MAX_DENOMINATOR)
    if frac.denominator != 1 and abs(float(frac) - x) <= FRACTION_TOL:
        return frac
    return None


def fmt_complex(z) -> str:
    z = complex(z)
    re = z.real if abs(z.real) > 1e-15 else 0.0
    im = z.imag if abs(z.imag) > 1e-15 else 0.0
    if im == 0.0:
        return fmt_real(re)
    if re == 0.0:
        text = f"{im:.6g}i"
        frac = _fraction(im)
        if frac is not None:
            num = {1: "", -1: "-"}.get(frac.numerator, str(frac.numerator))
            text += f" ({num}i/{frac.denominator})"
        return text
    sign = "+" if im > 0 else "-"
    return f"{re:.6g}{sign}{abs(im):.6g}i"


def _matrix_lines(entries, rows, cols, indent="    ") -> list[str]:
    cells = [[fmt_complex(z) for z in row] for row in entries]
    width = max([len(c) for row in cells for c in row] + [len(c) for c in cols])
    lead = max(len(r) for r in rows)
    out = [indent + " " * lead + "  " + "  ".join(c.rjust(width) for c in cols)]
    for label, row in zip(rows, cells):
        out.append(indent + label.ljust(lead) + "  " + "  ".join(c.rjust(width) for c in row))
    return out


def block_text(name: str, matrix: PropagatorMatrix, ent: EntanglementReport, weak=None) -> list[str]:
    lines = [f"[{name}] final {matrix.final}", "  propagators:"]
    lines += _matrix_lines(matrix.entries, matrix.row_labels, matrix.col_labels)
    if weak is not None:
        lines.append(f"  weak values (sum of propagators {fmt_complex(weak.denominator)}):")
        lines += _matrix_lines(weak.entries, matrix.row_labels, matrix.col_labels)
    lines.append("  squared Schmidt coefficients: " + ", ".join(fmt_real(p) for p in ent.spectrum.squared))
    lines.append(f"  Schmidt rank: {ent.rank}")
    lines.append(f"  concurrence: {fmt_real(ent.concurrence)}")
    lines.append(f"  entropy (nats): {fmt_real(ent.entropy)}")
    lines.append(f"  robustness: {fmt_real(ent.robustness)}")
    lines.append(f"  entangled: {'yes' if ent.entangled else 'no'}")
    return lines


def table_text(t: DetectionTable) -> list[str]:
    lines = [f"detection table {t.label}:"]
    for (a, b), p in t.joint.items():
        lines.append(f"  P(a{a}, b{b}) = {fmt_real(p)}")
    for m, p in t.unconditional_a.items():
        lines.append(f"  P(a{m}) = {fmt_real(p)}")
    for m, p in t.unconditional_b.items():
        lines.append(f"  P(b{m}) = {fmt_real(p)}")
    lines.append(f"  annihilated: {fmt_real(t.annihilated)}")
    return lines


def hardy_text(rep) -> str:
    lines = [f"Hardy interferometer, settings {rep.config.label}", ""]
    for r in rep.postselections:
        lines += block_text(r.name, r.propagator, r.entanglement, r.weak_values) + [""]
    for name in rep.impossible:
        lines += [f"[{name}] never occurs: every propagator vanishes", ""]
    lines += block_text("combined", rep.combined, rep.combined_entanglement) + [""]
    lines += table_text(rep.detection_table) + [""]
    lines.append(rep.lhv.summary())
    lines.append(f"no-signalling: {'true' if rep.no_signalling else 'false'}")
    return "\n".join(lines)


def nonlocality_text(tables, system: LHVSystem, verdict: FeasibilityVerdict, no_signalling: bool) -> str:
    lines = []
    for t in tables.values():
        lines += table_text(t) + [""]
    lines.append("local model constraints (target a6, b6):")
    lines += [f"  {c}" for c in system.constraints]
    lines += ["", verdict.summary(), f"no-signalling: {'true' if no_signalling else 'false'}"]
    return "\n".join(lines)
