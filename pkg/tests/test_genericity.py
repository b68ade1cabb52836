import numpy as np
import pytest

from tridiag4 import linalg
from tridiag4.generate import jordan_block, make_matrix, random_unitary
from tridiag4.genericity import (
    check_distinct_eigenvalues,
    check_nonsingular,
    check_pencil_rank,
    classify,
    common_eigenvectors,
)
from tridiag4.pencil import Pencil, pencil_matrix

N4 = jordan_block(4)


class TestNonsingular:
    def test_identity(self):
        assert check_nonsingular(np.eye(4))

    def test_nilpotent_block(self):
        assert not check_nonsingular(N4)

    def test_random_statistics(self):
        hits = sum(check_nonsingular(make_matrix("gaussian", 4, s)) for s in range(100))
        assert hits == 100


class TestDistinctEigenvalues:
    def test_distinct_diagonal(self):
        assert check_distinct_eigenvalues(np.diag([1.0, 2.0, 3.0, 4.0]))

    def test_nilpotent_block(self):
        assert not check_distinct_eigenvalues(N4)

    def test_repeated_diagonal(self):
        assert not check_distinct_eigenvalues(np.diag([1.0, 1.0, 2.0, 3.0]))


class TestPencilRank:
    def test_jordan_block_passes(self):
        # the corner minors t1^3 and t2^3 force t1 = t2 = 0, and then the
        # diagonal minors force t0 = 0: no rank-2 point exists
        ok, witness = check_pencil_rank(N4)
        assert ok
        assert witness is None

    def test_repeated_eigenvalue_normal_fails_with_witness(self):
        a = np.diag([1.0, 1.0, 2.0, 3.0])
        ok, witness = check_pencil_rank(a)
        assert not ok
        assert witness is not None
        s = np.linalg.svd(pencil_matrix(Pencil(a), witness), compute_uv=False)
        assert s[0] <= 1e-12 or s[2] <= 1e-8 * s[0]

    def test_identity_fails(self):
        ok, witness = check_pencil_rank(np.eye(4))
        assert not ok
        assert witness is not None

    def test_random_statistics(self):
        for s in range(30):
            ok, _ = check_pencil_rank(make_matrix("gaussian", 4, s))
            assert ok

    def test_agrees_for_adjoint(self):
        for s in range(10):
            a = make_matrix("gaussian", 4, 50 + s)
            ok1, _ = check_pencil_rank(a)
            ok2, _ = check_pencil_rank(linalg.adjoint(a))
            assert ok1 == ok2


class TestCommonEigenvectors:
    def test_hermitian_has_four(self):
        a = make_matrix("hermitian", 4, 1)
        assert len(common_eigenvectors(a)) == 4

    def test_block_structure_shares_coordinates(self):
        a = np.zeros((4, 4), dtype=complex)
        a[0, 1] = 1.0
        a[2, 2] = 2.0
        a[3, 3] = 3.0
        found = common_eigenvectors(a)
        for k in (2, 3):
            ek = np.eye(4)[k]
            assert any(linalg.projective_distance(v, ek) < 1e-8 for v in found)

    def test_random_matrix_has_none(self):
        for s in range(30):
            assert common_eigenvectors(make_matrix("gaussian", 4, s)) == []

    def test_residual_certified(self):
        a = make_matrix("hermitian", 4, 2)
        astar = linalg.adjoint(a)
        scale = linalg.matrix_norm(a)
        for v in common_eigenvectors(a):
            mu = np.vdot(v, astar @ v)
            assert np.linalg.norm(astar @ v - mu * v) <= 1e-8 * scale


class TestClassify:
    def test_jordan_block_report(self):
        report = classify(N4)
        assert (report.nonsingular, report.distinct_eigenvalues, report.pencil_rank_ok) == (
            False,
            False,
            True,
        )
        assert "singular" in report.details

    def test_identity_report(self):
        report = classify(np.eye(4))
        assert report.nonsingular
        assert not report.distinct_eigenvalues
        assert not report.pencil_rank_ok

    def test_spectrum_determined_tests_are_unitary_invariant(self):
        rng = np.random.default_rng(33)
        for s in range(5):
            a = make_matrix("gaussian", 4, 60 + s)
            u = random_unitary(4, rng)
            b = u @ a @ np.conj(u).T
            assert check_nonsingular(a) == check_nonsingular(b)
            assert check_distinct_eigenvalues(a) == check_distinct_eigenvalues(b)

    def test_random_all_generic(self):
        for s in range(20):
            report = classify(make_matrix("gaussian", 4, 80 + s))
            assert report.in_generic_set
            assert report.common_eigenvectors == []

    def test_as_dict_shape(self):
        d = classify(N4).as_dict()
        assert set(d) == {"s1", "s2", "s3", "common_eigenvectors", "witness", "details"}
