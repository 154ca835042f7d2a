import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from hsfqsp.bdg import mode_energies
from hsfqsp.fock import FockState, encode_pseudospin
from hsfqsp.fragment import build_fragment
from hsfqsp.hamiltonian import SparseOperator, build_h_ph, build_h_stag, matvec


def xx_block(n_sites, n_up, J=1.0):
    """XX chain block from spin-exchange rules, indexed by u/d strings."""
    configs = ["".join(c) for c in itertools.product("ud", repeat=n_sites) if c.count("u") == n_up]
    index = {c: k for k, c in enumerate(configs)}
    H = np.zeros((len(configs), len(configs)))
    for c in configs:
        for m in range(n_sites - 1):
            if c[m] != c[m + 1]:
                swapped = c[:m] + c[m + 1] + c[m] + c[m + 2 :]
                H[index[swapped], index[c]] += J
    return configs, H


class TestPairHopping:
    def test_two_state(self):
        b = build_fragment(FockState.from_occupations("0110"))
        np.testing.assert_array_equal(build_h_ph(b, 1.0).toarray(), [[0, 1], [1, 0]])

    def test_frozen(self):
        b = build_fragment(FockState.from_occupations("1100"))
        np.testing.assert_array_equal(build_h_ph(b, 3.0).toarray(), [[0]])

    def test_neel_eight_sites_is_xx_block(self):
        b = build_fragment(encode_pseudospin("udud"))
        H = build_h_ph(b, 0.7).toarray()
        configs, Hxx = xx_block(4, 2, 0.7)
        perm = [b.index(encode_pseudospin(c).bits) for c in configs]
        np.testing.assert_array_equal(H[np.ix_(perm, perm)], Hxx)

    @pytest.mark.parametrize("seed", ["ud+-du", "ududu-++-d", "u+d+u-"])
    def test_symmetric(self, seed):
        op = build_h_ph(build_fragment(seed))
        assert op.symmetric
        assert op.dim == build_fragment(seed).dim

    def test_spectrum_is_free_fermion_sums(self):
        b = build_fragment(encode_pseudospin("udud"))
        evals = np.linalg.eigvalsh(build_h_ph(b).toarray())
        eps = mode_energies(4)
        pairs = sorted(eps[i] + eps[j] for i, j in itertools.combinations(range(4), 2))
        np.testing.assert_allclose(evals, pairs, atol=1e-10)

    @pytest.mark.parametrize("n", [5, 6])
    def test_larger_spectrum(self, n):
        b = build_fragment(encode_pseudospin("ud" * (n // 2) + "u" * (n % 2)))
        evals = np.linalg.eigvalsh(build_h_ph(b).toarray())
        eps = mode_energies(n)
        k = (n + 1) // 2
        sums = sorted(sum(eps[list(c)]) for c in itertools.combinations(range(n), k))
        np.testing.assert_allclose(evals, sums, atol=1e-10)


class TestStaggered:
    def test_ud(self):
        b = build_fragment(encode_pseudospin("ud"))
        diag = build_h_stag(b, 2.0).diag()
        assert diag[b.index(encode_pseudospin("ud").bits)] == -2.0
        assert diag[b.index(encode_pseudospin("du").bits)] == 2.0

    def test_fractons(self):
        b = build_fragment(encode_pseudospin("++"))
        np.testing.assert_allclose(build_h_stag(b, 5.0).toarray(), [[0.0]])

    def test_zero_field(self):
        b = build_fragment(encode_pseudospin("udud"))
        assert not np.any(build_h_stag(b, 0.0).toarray())

    def test_offset_flips_sign(self):
        b = build_fragment(encode_pseudospin("udud"))
        np.testing.assert_allclose(build_h_stag(b, 1.0, offset=1).diag(), -build_h_stag(b, 1.0).diag())

    def test_commutes_with_fragment(self):
        b = build_fragment(encode_pseudospin("udu-+d"))
        assert build_h_stag(b).matrix.nnz <= b.dim
        assert build_h_stag(b).diagonal


class TestMatvec:
    def test_identity(self):
        op = SparseOperator(sp.identity(3, format="csr"), diagonal=True)
        v = np.array([1.0, 2.0j, -3.0])
        np.testing.assert_array_equal(matvec(op, v), v)

    def test_swap(self):
        op = SparseOperator(sp.csr_matrix([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_array_equal(matvec(op, np.array([1.0, 0.0])), [0.0, 1.0])

    def test_hermitian(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(20, 20))
        op = SparseOperator(sp.csr_matrix(a + a.T))
        u = rng.normal(size=20) + 1j * rng.normal(size=20)
        v = rng.normal(size=20) + 1j * rng.normal(size=20)
        assert abs(np.vdot(u, matvec(op, v)) - np.vdot(matvec(op, u), v)) < 1e-13

    def test_mismatch(self):
        op = SparseOperator(sp.identity(3, format="csr"))
        with pytest.raises(ValueError):
            matvec(op, np.ones(4))

    def test_deterministic(self):
        b = build_fragment(encode_pseudospin("ududud"))
        op = build_h_ph(b)
        v = np.random.default_rng(0).normal(size=b.dim)
        assert np.array_equal(matvec(op, v), matvec(build_h_ph(b), v))
