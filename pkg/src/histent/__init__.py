"""Entanglement measures for bipartite quantum histories."""

from .circuit import Circuit, ModeMap, TimeStep, apply_step, evolve, load_circuit
from .entanglement import concurrence, entanglement_entropy, robustness, schmidt_rank, schmidt_spectrum
from .hilbert import Mode, Particle, TwoParticleState, inner_product, project, squared_norm
from .histories import alpha_index, combined_matrix, multi_index, propagator_matrix, sum_over_histories

__version__ = "0.1.0"
