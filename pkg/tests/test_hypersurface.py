import numpy as np
import pytest

from bihyper.curvature import ConformalMetric, ricci_conformal
from bihyper.errors import DegenerateInputError, DomainError
from bihyper.hypersurface import (
    Hyperplane,
    adapted_frame,
    align_to_pivots,
    grad_H,
    grad_H_fd,
    gram_schmidt_oracle,
    hypersurface_state,
    induction_sum,
    laplacian_H,
    laplacian_H_fd,
    mean_curvature,
    natural_frame,
    ricci_normal,
    ricci_normal_from_pieces,
    ricci_tangential,
    ricci_tangential_from_pieces,
    second_fundamental_form,
    shape_operator_norm_sq,
    shape_operator_norm_sq_fd,
)
from bihyper.jets import Constant, PowerLaw, Reciprocal

from conftest import random_family, random_height

S = np.sqrt(2) / 4
EXAMPLE_A = (S, S, S, S)


def random_plane(rng, m=None):
    m = int(rng.integers(2, 9)) if m is None else m
    a = rng.normal(size=m) * rng.uniform(0.1, 3)
    return Hyperplane(tuple(a), float(rng.normal()))


def test_k_constants():
    hp = Hyperplane((3.0, 0.0, 4.0))
    np.testing.assert_allclose(hp.k, [1, 1 / np.sqrt(10), 1 / np.sqrt(10), 1 / np.sqrt(26)])
    assert 0 < hp.k_m <= 1


def test_horizontal_frame():
    fr = adapted_frame(Hyperplane((0.0, 0.0, 0.0)))
    np.testing.assert_array_equal(fr.tangent, np.eye(4)[:3])
    np.testing.assert_array_equal(fr.normal, [0, 0, 0, -1])


def test_frame_for_example_coefficients():
    hp = Hyperplane(EXAMPLE_A)
    assert hp.k_m == pytest.approx(np.sqrt(2 / 3), rel=1e-15)
    xi = adapted_frame(hp).normal
    r = np.sqrt(2 / 3)
    np.testing.assert_allclose(xi, [r * S] * 4 + [-r], rtol=1e-15)


def test_frame_orthonormal_and_tangent(rng):
    for _ in range(300):
        hp = random_plane(rng)
        fr = adapted_frame(hp)
        np.testing.assert_allclose(fr.gram(), np.eye(hp.m + 1), atol=1e-12)
        eta = natural_frame(hp)[-1]
        np.testing.assert_allclose(fr.tangent @ eta, 0, atol=1e-12)


def test_zero_coefficient_needs_no_special_case():
    hp = Hyperplane((0.7, 0.0, -1.2))
    fr = adapted_frame(hp)
    assert hp.k[2] == hp.k[1]
    np.testing.assert_allclose(fr.tangent[1], [0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(fr.gram(), np.eye(4), atol=1e-15)


def test_gram_schmidt_identity_input():
    Q = gram_schmidt_oracle(np.eye(4))
    np.testing.assert_array_equal(Q, np.eye(4))


def test_gram_schmidt_two_vectors():
    Q = gram_schmidt_oracle([[1.0, 1.0], [0.0, 1.0]])
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(Q, [[r, r], [-r, r]], atol=1e-15)


def test_gram_schmidt_rank_deficient():
    with pytest.raises(DegenerateInputError):
        gram_schmidt_oracle([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]])


def test_gram_schmidt_matches_frame(rng):
    for _ in range(200):
        hp = random_plane(rng)
        Q = align_to_pivots(gram_schmidt_oracle(natural_frame(hp)))
        fr = adapted_frame(hp)
        np.testing.assert_allclose(Q[:-1], fr.tangent, atol=1e-12)
        np.testing.assert_allclose(Q[-1] * np.sign(Q[-1] @ fr.normal), fr.normal, atol=1e-12)


def test_induction_identity(rng):
    for _ in range(300):
        hp = random_plane(rng, int(rng.integers(2, 11)))
        assert induction_sum(hp) == pytest.approx(1 - hp.k_m ** 2, abs=1e-12)


def test_mean_curvature_values():
    assert mean_curvature(Hyperplane((0.3, 0.2)), ConformalMetric(3, Constant(2)), 1.0) == 0.0
    A, B, z = 2.0, 3.0, 0.5
    H = mean_curvature(Hyperplane((0.0, 0.0, 0.0)), ConformalMetric(4, Reciprocal(A, B)), z)
    assert H == pytest.approx(A / (A * z + B) ** 2, rel=1e-15)
    H = mean_curvature(Hyperplane(EXAMPLE_A), ConformalMetric(5, PowerLaw(1, 1, 1 / 6)), 2.0)
    assert H == pytest.approx(-np.sqrt(2 / 3) / 6 * 3 ** (-5 / 6), rel=1e-14)


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        mean_curvature(Hyperplane((0.1, 0.2)), ConformalMetric(5, Constant(1)), 1.0)
    with pytest.raises(DomainError):
        Hyperplane((0.5,))


def test_umbilicity_and_shape_norm(rng):
    for _ in range(100):
        fam = random_family(rng)
        hp = random_plane(rng)
        M = ConformalMetric(hp.m + 1, fam)
        z = random_height(rng, fam)
        B = second_fundamental_form(hp, M, z)
        H = mean_curvature(hp, M, z)
        np.testing.assert_allclose(B, H * np.eye(hp.m), atol=1e-10 * max(1, abs(H)))
        assert shape_operator_norm_sq(hp, M, z) == pytest.approx(hp.m * H ** 2, rel=1e-14, abs=0)


def test_shape_norm_against_fd(rng):
    for _ in range(20):
        fam = random_family(rng, with_constant=False)
        hp = random_plane(rng)
        M = ConformalMetric(hp.m + 1, fam)
        z = random_height(rng, fam)
        assert shape_operator_norm_sq_fd(hp, M, z) == pytest.approx(
            shape_operator_norm_sq(hp, M, z), rel=1e-5)


def test_grad_H_trivial_cases():
    M = ConformalMetric(4, Reciprocal(1, 2))
    assert not np.any(grad_H(Hyperplane((0.0, 0.0, 0.0)), M, 1.0))


def test_grad_H_against_fd(rng):
    hp = Hyperplane(EXAMPLE_A)
    M = ConformalMetric(5, PowerLaw(1, 1, 1 / 6))
    for z in (0.3, 1.0, 5.0):
        g = grad_H(hp, M, z)
        assert np.all(g != 0)
        np.testing.assert_allclose(grad_H_fd(hp, M, z), g, rtol=1e-5)
    for _ in range(20):
        fam = random_family(rng, with_constant=False)
        hp = random_plane(rng)
        M = ConformalMetric(hp.m + 1, fam)
        z = random_height(rng, fam)
        g = grad_H(hp, M, z)
        np.testing.assert_allclose(grad_H_fd(hp, M, z), g, rtol=1e-5, atol=1e-9 * np.max(np.abs(g)))


def test_laplacian_trivial_cases():
    assert laplacian_H(Hyperplane((0.0, 0.0)), ConformalMetric(3, PowerLaw(1, 1, 0.3)), 1.0) == 0.0
    assert laplacian_H(Hyperplane((0.4, 0.1)), ConformalMetric(3, Constant(1)), 1.0) == 0.0


def test_laplacian_against_fd_for_example():
    hp = Hyperplane(EXAMPLE_A)
    M = ConformalMetric(5, PowerLaw(1, 1, 1 / 6))
    assert laplacian_H_fd(hp, M, 1.0) == pytest.approx(laplacian_H(hp, M, 1.0), rel=1e-3)


def test_ricci_normal_values():
    assert ricci_normal(Hyperplane((0.2, 0.1)), ConformalMetric(3, Constant(5)), 0.0) == 0.0
    A, B, z, m = 1.5, 2.0, 0.8, 5
    val = ricci_normal(Hyperplane((0.0,) * m), ConformalMetric(m + 1, Reciprocal(A, B)), z)
    assert val == pytest.approx(m * A ** 2 * (A * z + B) ** -4, rel=1e-14)


def test_ricci_closed_forms_against_ambient(rng):
    for _ in range(100):
        fam = random_family(rng)
        hp = random_plane(rng)
        M = ConformalMetric(hp.m + 1, fam)
        z = random_height(rng, fam)
        fr = adapted_frame(hp)
        rn = ricci_normal(hp, M, z)
        assert ricci_conformal(M, z, fr.normal, fr.normal) == pytest.approx(rn, rel=1e-10, abs=1e-14)
        assert ricci_normal_from_pieces(hp, M, z) == pytest.approx(rn, rel=1e-12, abs=1e-14)
        rt = ricci_tangential(hp, M, z)
        np.testing.assert_array_equal(rt, (hp.m - 1) * grad_H(hp, M, z))
        ambient = np.array([ricci_conformal(M, z, fr.normal, e) for e in fr.tangent])
        np.testing.assert_allclose(ambient, rt, rtol=1e-8, atol=1e-12)
        np.testing.assert_allclose(ricci_tangential_from_pieces(hp, M, z), rt, rtol=1e-10, atol=1e-14)


def test_state_bundle_is_umbilical():
    hp = Hyperplane(EXAMPLE_A)
    st = hypersurface_state(hp, ConformalMetric(5, PowerLaw(1, 1, 1 / 6)), 1.0)
    assert st.A_norm_sq == pytest.approx(4 * st.H ** 2)
    np.testing.assert_allclose(st.ric_tangential, 3 * st.gradH)
