"""Shared test utilities: random circuits and a dense state-vector oracle."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from histent.circuit import Circuit, ModeMap, TimeStep
from histent.hilbert import TwoParticleState


def random_layered_circuit(rng: np.random.Generator, k: int) -> Circuit:
    """Annihilation-free circuit with ``k`` intermediate time points.

    Layer ``t`` uses modes ``2t`` and ``2t + 1``; each step is an independent
    random 2x2 unitary per particle. The initial state is a random (generally
    entangled) state on layer 0, and every pair of the last layer is a
    declared postselection.
    """
    layers = k + 2
    modes = 2 * layers
    steps = []
    for t in range(layers - 1):
        maps = []
        for _ in range(2):
            u = unitary_group.rvs(2, random_state=rng)
            maps.append(ModeMap({2 * t + s: [(2 * t + 2 + r, u[r, s]) for r in range(2)] for s in range(2)}))
        steps.append(TimeStep(maps[0], maps[1]))
    amps = rng.normal(size=4) + 1j * rng.normal(size=4)
    amps /= np.linalg.norm(amps)
    initial = TwoParticleState(modes, modes, {(a, b): amps[2 * a + b] for a in range(2) for b in range(2)})
    bases = tuple(((2 * t, 2 * t + 1), (2 * t, 2 * t + 1)) for t in range(1, k + 1))
    last = 2 * (k + 1)
    posts = {f"a{a}b{b}": (a, b) for a in (last, last + 1) for b in (last, last + 1)}
    return Circuit(modes, modes, tuple(steps), initial, bases, posts, name=f"random k={k}")


def dense_map(mmap: ModeMap, modes: int) -> np.ndarray:
    out = np.zeros((modes, modes), dtype=complex)
    for src, targets in mmap.rules.items():
        for tgt, coeff in targets:
            out[tgt, src] += coeff
    return out


def dense_initial(circuit: Circuit) -> np.ndarray:
    psi = np.zeros((circuit.mode_count_a, circuit.mode_count_b), dtype=complex)
    for (a, b), amp in circuit.initial:
        psi[a, b] = amp
    return psi


def dense_step(psi: np.ndarray, step: TimeStep) -> np.ndarray:
    ua = dense_map(step.map_a, psi.shape[0])
    ub = dense_map(step.map_b, psi.shape[1])
    out = ua @ psi @ ub.T
    for a, b in step.annihilate:
        out[a, b] = 0
    return out


def dense_evolve(circuit: Circuit) -> np.ndarray:
    psi = dense_initial(circuit)
    for step in circuit.steps:
        psi = dense_step(psi, step)
    return psi


def dense_propagator(circuit: Circuit, path_a, path_b, final) -> complex:
    """<final| K |initial> with projectors applied as dense masks."""
    psi = dense_initial(circuit)
    for j, step in enumerate(circuit.steps):
        psi = dense_step(psi, step)
        if j < len(path_a):
            mask = np.zeros_like(psi)
            mask[path_a[j], path_b[j]] = 1
            psi = psi * mask
    return complex(psi[final])


def random_product_circuit(rng: np.random.Generator, k: int) -> Circuit:
    """Like :func:`random_layered_circuit` but with a product initial state."""
    c = random_layered_circuit(rng, k)
    va = rng.normal(size=2) + 1j * rng.normal(size=2)
    vb = rng.normal(size=2) + 1j * rng.normal(size=2)
    va /= np.linalg.norm(va)
    vb /= np.linalg.norm(vb)
    initial = TwoParticleState(c.mode_count_a, c.mode_count_b, {(a, b): va[a] * vb[b] for a in range(2) for b in range(2)})
    return Circuit(c.mode_count_a, c.mode_count_b, c.steps, initial, c.intermediate_bases, c.postselections, c.name)
