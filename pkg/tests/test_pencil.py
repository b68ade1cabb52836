import warnings

import numpy as np
import pytest

from tridiag4 import linalg
from tridiag4.errors import NoSectionZero, RankDeficientPencil
from tridiag4.generate import jordan_block, make_matrix
from tridiag4.pencil import (
    Pencil,
    SectionOptions,
    curve_residual,
    fiber_points,
    kernel_vector,
    pencil_matrix,
    section_residual,
    section_zeros,
)

N4 = jordan_block(4)


class TestPencilMatrix:
    def test_unit_t0_gives_identity(self):
        p = Pencil(make_matrix("gaussian", 4, 0))
        assert np.allclose(pencil_matrix(p, [1.0, 0.0, 0.0]), np.eye(4))

    def test_jordan_block_banded_form(self):
        p = Pencil(N4)
        t0, t1, t2 = 0.3 + 0.1j, -0.7, 0.2j
        m = pencil_matrix(p, [t0, t1, t2])
        expected = t0 * np.eye(4) + t1 * np.diag(np.ones(3), 1) + t2 * np.diag(np.ones(3), -1)
        assert np.allclose(m, expected)

    def test_unit_t1_gives_a(self):
        a = make_matrix("gaussian", 4, 1)
        assert np.allclose(pencil_matrix(Pencil(a), [0.0, 1.0, 0.0]), a)

    def test_minor_homogeneity(self):
        # every 3x3 minor of the pencil is homogeneous of degree 3 in t
        a = make_matrix("gaussian", 4, 2)
        p = Pencil(a)
        t = np.array([0.4, -0.2 + 0.6j, 1.1j])
        lam = 0.7 - 1.3j
        m1 = pencil_matrix(p, t)
        m2 = pencil_matrix(p, lam * t)
        for i in range(4):
            for j in range(4):
                rows = [r for r in range(4) if r != i]
                cols = [c for c in range(4) if c != j]
                d1 = np.linalg.det(m1[np.ix_(rows, cols)])
                d2 = np.linalg.det(m2[np.ix_(rows, cols)])
                assert abs(d2 - lam**3 * d1) <= 1e-10 * max(1.0, abs(d2))


class TestFiberPoints:
    def test_hermitian_base_gives_real_spectrum(self):
        a = make_matrix("hermitian", 4, 3)
        pts = fiber_points(Pencil(a), [1.0, 0.0])
        assert len(pts) == 4
        for pt in pts:
            # t = [-lambda : 1 : 0] with lambda real
            ratio = pt.t[0] / pt.t[1]
            assert abs(ratio.imag) < 1e-10

    def test_jordan_block_quadruple_branch_point(self):
        pts = fiber_points(Pencil(N4), [1.0, 0.0])
        assert len(pts) == 4
        expected = linalg.canonical_projective([0.0, 1.0, 0.0])
        for pt in pts:
            assert pt.near_branch
            assert linalg.projective_distance(pt.t, expected) < 1e-8

    def test_fiber_points_lie_on_curve(self):
        a = make_matrix("gaussian", 4, 4)
        p = Pencil(a)
        pts = fiber_points(p, [1.0, 1.0])
        assert len(pts) == 4
        for pt in pts:
            m = pencil_matrix(p, pt.t)
            assert abs(np.linalg.det(m)) <= 1e-10 * max(1.0, np.linalg.norm(m) ** 4)
            assert np.linalg.norm(m @ pt.v) <= 1e-10 * np.linalg.norm(m)

    def test_four_distinct_points_generically(self):
        a = make_matrix("gaussian", 4, 5)
        pts = fiber_points(Pencil(a), [1.0, 0.3 - 0.8j])
        for i in range(4):
            for j in range(i + 1, 4):
                assert linalg.projective_distance(pts[i].t, pts[j].t) > 1e-6


class TestKernelVector:
    def test_jordan_block_left_corner(self):
        v = kernel_vector(Pencil(N4), [0.0, 1.0, 0.0])
        assert np.allclose(v, np.eye(4)[0])

    def test_jordan_block_right_corner(self):
        v = kernel_vector(Pencil(N4), [0.0, 0.0, 1.0])
        assert np.allclose(v, np.eye(4)[3])

    def test_residual_on_random_fibers(self):
        a = make_matrix("gaussian", 4, 6)
        p = Pencil(a)
        for base in ([1.0, 0.5], [1.0, -1.2j], [0.3, 1.0]):
            for pt in fiber_points(p, base):
                m = pencil_matrix(p, pt.t)
                assert np.linalg.norm(m @ pt.v) <= 1e-10 * np.linalg.norm(m, 2)

    def test_rank_deficient_raises(self):
        # identity: the pencil vanishes outright on its determinant curve
        with pytest.raises(RankDeficientPencil):
            kernel_vector(Pencil(np.eye(4)), [-1.0, 1.0, 0.0])


class TestCurveResidual:
    def test_eigenvector_is_on_curve(self):
        a = make_matrix("gaussian", 4, 7)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lam, v = linalg.eigen(a)[0]
        assert curve_residual(Pencil(a), v) <= 1e-10

    def test_kernel_vectors_on_curve(self):
        a = make_matrix("gaussian", 4, 8)
        p = Pencil(a)
        for pt in fiber_points(p, [1.0, 0.9 + 0.4j]):
            assert curve_residual(p, pt.v) <= 1e-10

    def test_random_vectors_far_from_curve(self):
        rng = np.random.default_rng(10)
        a = make_matrix("gaussian", 4, 9)
        p = Pencil(a)
        values = []
        for _ in range(50):
            v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            values.append(curve_residual(p, v))
        assert np.median(values) > 1e-3


class TestSectionResidual:
    def test_tridiagonal_first_basis_vector(self):
        a = make_matrix("tridiagonal", 4, 11)
        h, sigma4 = section_residual(Pencil(a), np.eye(4)[0])
        assert abs(h) <= 1e-12
        assert sigma4 <= 1e-12

    def test_eigenvector_degenerate_h_but_large_sigma4(self):
        a = make_matrix("gaussian", 4, 12)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, v = linalg.eigen(a)[0]
        h, sigma4 = section_residual(Pencil(a), v)
        assert abs(h) <= 1e-10  # columns v, Av colinear force the determinant down
        assert sigma4 > 1e-4  # but the rank certificate rejects the point

    def test_typical_curve_point_nonzero(self):
        a = make_matrix("gaussian", 4, 13)
        p = Pencil(a)
        values = [abs(section_residual(p, pt.v)[0]) for pt in fiber_points(p, [1.0, 0.7])]
        assert max(values) > 1e-3


class TestSectionZeros:
    def test_tridiagonal_matrix_includes_first_basis_vector(self):
        a = make_matrix("tridiagonal", 4, 14)
        zeros = section_zeros(Pencil(a), SectionOptions(samples=720, seed=0))
        e1 = np.eye(4)[0]
        assert any(linalg.projective_distance(z.point.v, e1) < 1e-6 for z in zeros)

    def test_random_matrix_count_within_bound(self):
        a = make_matrix("gaussian", 4, 15)
        zeros = section_zeros(
            Pencil(a),
            SectionOptions(samples=1440, restarts=32, stop_on_shortcut=False, seed=1),
        )
        assert 1 <= len(zeros) <= 12

    def test_zero_membership_invariants(self):
        a = make_matrix("gaussian", 4, 16)
        p = Pencil(a)
        zeros = section_zeros(p, SectionOptions(samples=1440, restarts=32, seed=2, stop_on_shortcut=False))
        for z in zeros:
            m = pencil_matrix(p, z.point.t)
            assert np.linalg.norm(m @ z.point.v) <= 1e-8 * np.linalg.norm(m, 2)
            assert curve_residual(p, z.point.v) <= 1e-8
            assert z.sigma4 <= 1e-8
            assert z.accepted

    def test_kernel_map_inverse_property(self):
        # for v on the curve, the 4x3 map t -> (t0 v + t1 Av + t2 A*v) has a
        # one-dimensional kernel spanned by the pencil point itself
        a = make_matrix("gaussian", 4, 17)
        p = Pencil(a)
        for pt in fiber_points(p, [1.0, -0.4 + 0.2j]):
            b = np.column_stack([pt.v, a @ pt.v, linalg.adjoint(a) @ pt.v])
            s = np.linalg.svd(b, compute_uv=False)
            assert s[2] <= 1e-10 * s[0]
            null = linalg.nullspace(b, tol=1e-8)
            assert null.shape[1] == 1
            assert linalg.projective_distance(null[:, 0], pt.t) < 1e-8

    def test_sorted_by_sigma4(self):
        a = make_matrix("gaussian", 4, 18)
        zeros = section_zeros(Pencil(a), SectionOptions(samples=1440, restarts=32, seed=3, stop_on_shortcut=False))
        sigmas = [z.sigma4 for z in zeros]
        assert sigmas == sorted(sigmas)

    def test_no_zero_raises(self):
        # rank-deficient pencil everywhere on the curve: nothing certifies
        with pytest.raises((NoSectionZero, RankDeficientPencil)):
            section_zeros(Pencil(np.eye(4)), SectionOptions(samples=240, restarts=4, seed=4))

    def test_block_matrix_shortcut(self):
        # a 2+2 block matrix has an invariant plane; the sweep should exit
        # through the forward-closure shortcut
        a = np.zeros((4, 4), dtype=complex)
        a[:2, :2] = make_matrix("gaussian", 2, 19)
        a[2:, 2:] = make_matrix("gaussian", 2, 20)
        zeros = section_zeros(Pencil(a), SectionOptions(samples=720, seed=5))
        assert any(z.shortcut for z in zeros)
