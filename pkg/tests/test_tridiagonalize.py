import warnings

import numpy as np
import pytest

from tridiag4 import linalg
from tridiag4.errors import Unsolved
from tridiag4.generate import jordan_block, make_matrix, random_unitary
from tridiag4.genericity import common_eigenvectors
from tridiag4.pencil import Pencil, SectionOptions, section_zeros
from tridiag4.tridiagonalize import (
    Flag,
    Options,
    build_flag,
    deflate_common_eigenvector,
    flag_residuals,
    flag_to_unitary,
    off_tridiagonal_residual,
    perturb_and_retry,
    tridiagonalize,
    tridiagonalize3,
    verify,
)

N4 = jordan_block(4)


def solve_quiet(a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return tridiagonalize(a, **kw)


class TestDispatch:
    def test_two_by_two_trivial(self):
        a = np.array([[1.0 + 1j, 2.0], [3.0, 4.0]])
        r = tridiagonalize(a)
        assert r.provenance == "trivial"
        assert np.array_equal(r.u, np.eye(2))
        assert np.array_equal(r.t, a)

    def test_one_by_one(self):
        r = tridiagonalize(np.array([[2.0 - 1j]]))
        assert r.off_residual == 0.0

    def test_exactly_tridiagonal_is_trivial(self):
        a = make_matrix("tridiagonal", 4, 0)
        r = tridiagonalize(a)
        assert r.provenance == "trivial"
        assert np.array_equal(r.t, a)

    def test_n5_rejected(self):
        with pytest.raises(ValueError):
            tridiagonalize(np.eye(5))

    def test_random_4x4(self):
        for seed in range(25):
            a = make_matrix("gaussian", 4, seed)
            r = solve_quiet(a, seed=seed)
            assert r.off_residual <= 1e-8
            assert r.unitarity_residual <= 1e-10
            t2 = r.u @ a @ np.conj(r.u).T
            assert np.allclose(t2, r.t)

    def test_similarity_invariance_of_success(self):
        rng = np.random.default_rng(5)
        for seed in range(5):
            a = make_matrix("gaussian", 4, 30 + seed)
            u = random_unitary(4, rng)
            r = solve_quiet(u @ a @ np.conj(u).T, seed=seed)
            assert r.off_residual <= 1e-8

    def test_spectrum_preserved(self):
        for seed in range(10):
            a = make_matrix("gaussian", 4, seed)
            r = solve_quiet(a, seed=seed)
            rep = verify(r, a)
            assert rep.spectrum_gap <= 1e-8 * linalg.matrix_norm(a)


class TestTridiagonalize3:
    def test_diagonal(self):
        r = tridiagonalize3(np.diag([1.0, 2.0, 3.0]))
        assert r.off_residual == 0.0

    def test_hermitian_goes_through_eigenvector_case(self):
        for seed in range(5):
            a = make_matrix("hermitian", 3, seed)
            r = tridiagonalize3(a, seed=seed)
            assert r.off_residual <= 1e-10

    def test_random_batch(self):
        for seed in range(50):
            a = make_matrix("gaussian", 3, seed)
            r = tridiagonalize3(a, seed=seed)
            assert r.off_residual <= 1e-9
            assert r.unitarity_residual <= 1e-12


class TestDeflation:
    def test_normal_matrix(self):
        rng = np.random.default_rng(2)
        u = random_unitary(4, rng)
        a = u @ np.diag([1.0, 2.0j, -1.0, 3.0]) @ np.conj(u).T
        vs = common_eigenvectors(a)
        assert vs
        r = deflate_common_eigenvector(a, vs[0])
        assert r.off_residual <= 1e-10
        assert r.provenance == "common_eigenvector_deflation"

    def test_block_structure_matches_direct_construction(self):
        # [[lam, x*], [0, B]] with e1 a common eigenvector: the deflated
        # result must reproduce the compressed 3x3 solve
        lam = 1.5 - 0.5j
        b = make_matrix("gaussian", 3, 7)
        a = np.zeros((4, 4), dtype=complex)
        a[0, 0] = lam
        a[1:, 1:] = b
        r = deflate_common_eigenvector(a, np.eye(4)[0], seed=3)
        assert r.off_residual <= 1e-10
        assert abs(r.t[0, 0] - lam) < 1e-10
        sub = tridiagonalize3(b, seed=3)
        got = sorted(np.linalg.eigvals(r.t[1:, 1:]), key=lambda z: (z.real, z.imag))
        want = sorted(np.linalg.eigvals(sub.t), key=lambda z: (z.real, z.imag))
        assert np.allclose(got, want, atol=1e-8)

    def test_hermitian_full_pipeline_residuals(self):
        for seed in range(5):
            a = make_matrix("hermitian", 4, seed)
            r = solve_quiet(a, seed=seed)
            assert r.provenance == "common_eigenvector_deflation"
            assert r.off_residual <= 1e-10


class TestBuildFlag:
    def test_tridiagonal_candidate_gives_coordinate_flag(self):
        a = make_matrix("tridiagonal", 4, 4)
        zeros = section_zeros(Pencil(a), SectionOptions(samples=720, seed=0))
        e1 = np.eye(4)[0]
        cand = next(
            z for z in zeros if linalg.projective_distance(z.point.v, e1) < 1e-6
        )
        flag = build_flag(a, cand)
        for k in range(4):
            assert abs(abs(flag.basis[k, k]) - 1.0) < 1e-6

    def test_containments_hold_for_accepted_candidates(self):
        a = make_matrix("gaussian", 4, 5)
        zeros = section_zeros(
            Pencil(a), SectionOptions(samples=1440, restarts=32, seed=1, stop_on_shortcut=False)
        )
        for cand in zeros[:4]:
            flag = build_flag(a, cand)
            r2, r3 = flag_residuals(a, flag.basis)
            assert r2 <= 1e-8
            assert r3 <= 1e-8

    def test_shortcut_candidate_builds_valid_flag(self):
        a = np.zeros((4, 4), dtype=complex)
        a[:2, :2] = make_matrix("gaussian", 2, 8)
        a[2:, 2:] = make_matrix("gaussian", 2, 9)
        zeros = section_zeros(Pencil(a), SectionOptions(samples=720, seed=2))
        cand = next(z for z in zeros if z.shortcut)
        flag = build_flag(a, cand)
        r2, _ = flag_residuals(a, flag.basis)
        assert r2 <= 1e-8
        assert flag.provenance == "shortcut_dimW3"


class TestFlagToUnitary:
    def test_standard_flag(self):
        flag = Flag(basis=np.eye(4, dtype=complex))
        assert np.array_equal(flag_to_unitary(flag), np.eye(4))

    def test_permuted_flag(self):
        perm = np.eye(4)[:, [1, 0, 2, 3]].astype(complex)
        u = flag_to_unitary(Flag(basis=perm))
        assert np.array_equal(u, perm.T)

    def test_unitary_columns_invert(self):
        rng = np.random.default_rng(3)
        v = random_unitary(4, rng)
        u = flag_to_unitary(Flag(basis=v))
        assert np.allclose(u, np.conj(v).T)
        for i in range(4):
            assert np.allclose(np.conj(u).T @ np.eye(4)[i], v[:, i])


class TestFlagEquivalence:
    def test_both_characterizations_hold_on_every_flag(self):
        # the two flag conditions are equivalent; check both residuals on
        # flags produced by all the main paths
        mats = [
            make_matrix("gaussian", 4, 11),
            make_matrix("hermitian", 4, 12),
            make_matrix("tridiagonal", 4, 13),
        ]
        for a in mats:
            r = solve_quiet(a)
            r2, r3 = flag_residuals(a, r.flag.basis)
            assert r2 <= 1e-8
            assert r3 <= 1e-8


class TestPerturbAndRetry:
    def test_jordan_block_forced(self):
        r = solve_quiet(N4, force_path="perturb")
        assert r.provenance == "perturbed"
        assert r.perturbation_used > 0
        assert r.off_residual <= 1e-8

    def test_jordan_plus_generic_block(self):
        a = np.zeros((4, 4), dtype=complex)
        a[0, 0] = a[1, 1] = 1.5
        a[0, 1] = 1.0
        a[2:, 2:] = make_matrix("gaussian", 2, 9)
        a[0, 2] = 0.3 + 0.2j
        a[1, 3] = -0.1j
        assert common_eigenvectors(a) == []
        r = solve_quiet(a, force_path="perturb")
        assert r.off_residual <= 1e-8 and r.provenance == "perturbed"

    def test_hermitian_forced(self):
        a = make_matrix("hermitian", 4, 14)
        r = solve_quiet(a, force_path="perturb")
        assert r.off_residual <= 1e-8

    def test_unsolved_when_ladder_empty(self):
        with pytest.raises(Unsolved):
            perturb_and_retry(N4, Options(ladder=()))


class TestVerify:
    def test_valid_result_reports_small_residuals(self):
        a = make_matrix("gaussian", 4, 15)
        r = solve_quiet(a, seed=15)
        rep = verify(r, a)
        assert rep.off_residual <= 1e-8
        assert rep.unitarity_residual <= 1e-10
        assert rep.recompute_gap <= 1e-12

    def test_corrupted_unitary_detected(self):
        a = make_matrix("gaussian", 4, 16)
        r = solve_quiet(a, seed=16)
        r.u[0, 0] += 1e-3
        rep = verify(r, a)
        assert 1e-4 < rep.unitarity_residual < 1e-2

    def test_spectrum_matching_on_random(self):
        a = make_matrix("gaussian", 4, 17)
        r = solve_quiet(a, seed=17)
        rep = verify(r, a)
        assert rep.spectrum_gap <= 1e-8 * linalg.matrix_norm(a)
        assert len(rep.matching) == 4


class TestOffResidual:
    def test_measures_relative_max_entry(self):
        t = np.zeros((4, 4), dtype=complex)
        t[3, 0] = 2e-5
        assert off_tridiagonal_residual(t, 2.0) == pytest.approx(1e-5)
        assert off_tridiagonal_residual(np.zeros((2, 2)), 1.0) == 0.0
