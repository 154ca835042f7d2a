"""
Krylov fragments of the pair-hopping chain
==========================================

Pairs of fermion sites form pseudospins: u = 01, d = 10, + = 11, - = 00.
Pair hopping 0110 <-> 1001 swaps neighbouring u and d, while runs of equal
fractons (++, --) cannot move and split the chain into independent regions.
"""

from math import comb

from hsfqsp.fock import charges, encode_pseudospin
from hsfqsp.fragment import build_fragment, partition_regions, verify_factorization

seed = encode_pseudospin("ud")
print("ud as occupations:", seed.occupations(), " bits:", seed.bits)
print("charges:", charges(seed))

# %%
# Pure u/d strings behave like hard-core particles on N sites, so the
# fragment of the Neel state is all arrangements of N/2 u's.

for n in (4, 8, 14):
    b = build_fragment("ud" * (n // 2))
    print(f"Neel N={n:2d}: dim {b.dim:5d}  C(N, N/2) = {comb(n, n // 2)}")

# %%
# Fractons change the picture. A frozen ++ run is a domain wall.

for text in ("udud++udud", "ud+-ud", "ududu-++-dudud"):
    regions = partition_regions(text)
    desc = ", ".join(f"{r.start}-{r.stop} {r.kind.value}" for r in regions)
    print(f"{text:16s} dim {build_fragment(text).dim:6d}   {desc}")

# %%
# With a true wall the fragment is a product of the regional fragments.
# Next to a '-' the ++ run can erode, so the last seed does not factor.

print()
print("udud++udud factorizes:", verify_factorization("udud++udud"))
print("ududu-++-dudud factorizes:", verify_factorization("ududu-++-dudud"))
