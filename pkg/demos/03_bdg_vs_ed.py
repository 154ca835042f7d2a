"""
Free-fermion sectors versus exact propagation
=============================================

In the u/d sector pair hopping is a tight-binding chain. Sine modes pair up
into two-level sectors, each seeing the drive as a signal-processing
sequence with signal a = cos(pi cos(lam pi / (N + 1))). The Neel return
probability is then a product of single-qubit responses.
"""

import numpy as np

from hsfqsp.bdg import (
    correlation_from_pattern,
    evolve_correlation,
    neel_transition_probability,
    sectors,
    sigma_z_from_correlation,
    single_particle_unitary,
)
from hsfqsp.evolve import apply_drive, drive_operators, return_probability, schedule_from_phases
from hsfqsp.fock import encode_pseudospin
from hsfqsp.fragment import build_fragment
from hsfqsp.observables import sigma_z_profile
from hsfqsp.qsp import bb1_phases, trivial_phases

N = 6  # N = 8 has a sector at a = 0, which zeroes every odd response
for s in sectors(N):
    print(f"lambda={s.index}  x={s.momentum:.4f}  a={s.signal:+.6f}")

# %%
# Return probability of the Neel state after one cycle, two ways.

rng = np.random.default_rng(0)
sequences = {"trivial": trivial_phases(), "bb1": bb1_phases(), "random": rng.uniform(-np.pi, np.pi, 5)}
print()
for name, phases in sequences.items():
    ed = return_probability("ud" * (N // 2), schedule_from_phases(phases))
    bdg = neel_transition_probability(N, phases)
    print(f"{name:8s} ED {ed:.12f}   sectors {bdg:.12f}   diff {abs(ed - bdg):.1e}")

# %%
# Local magnetization from the N x N correlation matrix instead of the
# 20-dimensional fragment.

schedule = schedule_from_phases(bb1_phases())
basis = build_fragment("ud" * (N // 2))
ops = drive_operators(basis)
v = basis.basis_vector(encode_pseudospin("ud" * (N // 2)).bits)
C = correlation_from_pattern("ud" * (N // 2))
u = single_particle_unitary(schedule, N)
print()
for cycle in range(1, 4):
    v = apply_drive(schedule, basis, v, ops)
    C = evolve_correlation(C, u)
    ed = sigma_z_profile(v, basis)
    print(f"cycle {cycle}: sigma^z {np.round(ed, 4)}  max err {np.max(np.abs(ed - sigma_z_from_correlation(C))):.1e}")
