"""
Single-qubit signal processing responses
========================================

A phase sequence interleaves Z rotations with an X rotation that encodes a
signal ``a``. The top-left entry of the product is a polynomial ``P(a)``.
Here we compare the trivial sequence with the BB1 composite pulse.
"""

import numpy as np

from hsfqsp.qsp import bb1_chi, bb1_phases, compose_qsp, extract_pq, response, trivial_phases

print("BB1 chi =", bb1_chi())
print("BB1 phases =", np.round(bb1_phases(), 6))

# The trivial sequence is one X rotation, so |P|^2 = a^2.
# BB1 pins |P|^2 = 1 near a = 1 and is forced to vanish at a = 0 (P is odd).
print()
print(f"{'a':>6} {'trivial':>10} {'bb1':>10}")
for a in np.linspace(-1, 1, 11):
    print(f"{a:6.2f} {response(trivial_phases(), a):10.6f} {response(bb1_phases(), a):10.6f}")

# %%
# The polynomials themselves. extract_pq interpolates P and Q and checks
# that they reproduce the unitary, have definite parity, and satisfy
# |P|^2 + (1 - a^2)|Q|^2 = 1.

pq = extract_pq(bb1_phases())
print()
print("P coefficients (monomial, low order first):")
print(np.round(pq.p_coeffs, 6))
print("unitarity residual on 1000 points:", pq.unitarity_residual(np.linspace(-1, 1, 1000)))

# %%
# The full unitary at a = 1 is a pure Z rotation.

print()
print(np.round(compose_qsp(bb1_phases(), 1.0), 12))
