import numpy as np
import pytest
from scipy.integrate import solve_ivp

from bihyper.biharmonic import residual_single_normalized
from bihyper.errors import DegenerateInputError, DomainError
from bihyper.hypersurface import Hyperplane
from bihyper.curvature import ConformalMetric
from bihyper.jets import PowerLaw, Tabulated
from bihyper.solutions import (
    PRODUCT_ASSUMPTION,
    Counterexample,
    certify_counterexample,
    constraint_radius,
    make_counterexample,
    ode_solve_single,
    product_codim_k,
    reciprocal_leaf_check,
)

UNIT = (0.5, 0.5, 0.5, 0.5)


def test_constraint_radius_values():
    assert constraint_radius(1 / 6) == pytest.approx(np.sqrt(2) / 2, rel=1e-15)
    assert constraint_radius(0.25) == pytest.approx(1.0, rel=1e-15)
    assert constraint_radius(0.49) == pytest.approx(7.0, rel=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.5, -0.1, 0.7, float("nan")])
def test_constraint_radius_rejects(t):
    with pytest.raises(DomainError, match="t must lie in"):
        constraint_radius(t)


def test_constraint_radius_monotone():
    ts = np.linspace(0.001, 0.4999, 500)
    r = np.array([constraint_radius(t) for t in ts])
    assert np.all(np.diff(r) > 0)
    assert r[-1] > 40 and r[0] < 0.05


def test_make_counterexample_example():
    ce = make_counterexample(1 / 6, UNIT)
    np.testing.assert_allclose(ce.hyperplane.coeffs, [np.sqrt(2) / 4] * 4, rtol=1e-15)
    assert ce.metric.ambient_dim == 5 and ce.t == 1 / 6


def test_make_counterexample_rejects_bad_input():
    with pytest.raises(DomainError):
        make_counterexample(1 / 6, (1.0, 1.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        make_counterexample(1 / 6, (1.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        make_counterexample(1 / 6, UNIT, A=-1.0)
    with pytest.raises(DomainError):
        make_counterexample(0.7, UNIT)
    with pytest.raises(DomainError):
        Counterexample(ConformalMetric(4, PowerLaw(1, 1, 0.2)), Hyperplane((0.1, 0.2, 0.3)))


def test_certify_example_passes():
    cert = certify_counterexample(make_counterexample(1 / 6, UNIT))
    assert cert.passed and cert.failed_stage is None
    assert [s.name for s in cert.stages] == ["single_equation", "proper", "negative_curvature"]
    d = cert.to_dict()
    assert all("producer" in s and "tolerance" in s for s in d["stages"])


def test_certify_reports_first_failure():
    base = make_counterexample(0.2, UNIT)
    off = Counterexample(base.metric, Hyperplane(tuple(1.01 * base.hyperplane.coeffs)), 0.2)
    cert = certify_counterexample(off)
    assert not cert.passed and cert.failed_stage == "single_equation"


def test_constant_impostor_fails_properness():
    from bihyper.jets import Constant
    ce = Counterexample(ConformalMetric(5, Constant(1.0)), Hyperplane((0.3, 0.1, 0.0, 0.2)))
    cert = certify_counterexample(ce)
    assert cert.stages[0].passed
    assert cert.failed_stage == "proper"


@pytest.mark.parametrize("A,B,m", [(1, 1, 3), (2, 5, 7), (0.5, 0.1, 2), (1, 1, 4)])
def test_reciprocal_leaves(A, B, m):
    assert reciprocal_leaf_check(A, B, m).passed


def test_reciprocal_leaf_negative_control():
    cert = reciprocal_leaf_check(1, 1, 3, factor=PowerLaw(1, 1, -0.5))
    assert not cert.passed
    assert cert.failed_stage in ("horizontal_reduced", "residual_general")
    with pytest.raises(DomainError):
        reciprocal_leaf_check(1, 1, 1)


@pytest.mark.parametrize("t", [1 / 6, 0.1, 0.3, 0.45])
def test_ode_reproduces_power_law(t):
    S = 2 * t / (1 - 2 * t)
    traj = ode_solve_single(S, (1.0, t, t * (t - 1)), (0.0, 10.0))
    assert traj.complete
    exact = (traj.z + 1) ** t
    assert np.max(np.abs(traj.state[:, 0] - exact)) < 1e-6
    zs = np.linspace(0, 10, 201)
    assert np.max(np.abs(traj.dense(zs)[0] - (zs + 1) ** t)) < 1e-6
    assert np.max(traj.residual) < 1e-9


def test_ode_constant_data():
    traj = ode_solve_single(0.8, (2.5, 0.0, 0.0), (0.0, 5.0))
    np.testing.assert_array_equal(traj.state[:, 0], 2.5)


def test_ode_degenerate_and_domain():
    with pytest.raises(DegenerateInputError):
        ode_solve_single(0.0, (1.0, 0.1, 0.0), (0.0, 1.0))
    with pytest.raises(DomainError):
        ode_solve_single(0.5, (-1.0, 0.1, 0.0), (0.0, 1.0))


def test_ode_off_sphere_leaves_power_law():
    t = 1 / 6
    traj = ode_solve_single(1.0, (1.0, t, t * (t - 1)), (0.0, 10.0))
    f1 = traj.dense(1.0)[0]
    assert abs(f1 - 2 ** t) / 2 ** t > 1e-3


def test_ode_agrees_with_higher_order_integrator():
    S = 0.9
    y0 = (1.0, 0.3, -0.2)
    ours = ode_solve_single(S, y0, (0.0, 4.0))

    def rhs(z, y):
        f, f1, f2 = y
        return [f1, f2, (-(4 - S) * f * f1 * f2 + 4 * (2 + S) * f1 ** 3) / (S * f * f)]

    ref = solve_ivp(rhs, (0, 4), y0, method="DOP853", rtol=1e-12, atol=1e-12, dense_output=True)
    np.testing.assert_allclose(ours.dense(ours.z).T, ref.sol(ours.z).T, rtol=1e-7, atol=1e-8)


@pytest.mark.parametrize("slope", [-2.0, 2.0])
def test_ode_singularity_gives_partial_trajectory(slope):
    traj = ode_solve_single(0.5, (1.0, slope, 0.0), (0.0, 50.0))
    assert traj.blow_up and not traj.complete
    assert traj.z[-1] < 1.0
    assert np.all(traj.state[:, 0] > 0)


def test_ode_trajectory_as_family():
    t = 0.25
    traj = ode_solve_single(1.0, (1.0, t, t * (t - 1)), (0.0, 3.0))
    fam = traj.as_family()
    assert isinstance(fam, Tabulated)
    j = fam.jet(1.5)
    exact = PowerLaw(1, 1, t).jet(1.5)
    np.testing.assert_allclose(j.as_tuple(), exact.as_tuple(), rtol=1e-7)
    assert residual_single_normalized(np.array([0.5, 0.5, 0.5, 0.5]), j)[1] < 1e-8
    with pytest.raises(DomainError):
        fam.jet(5.0)


def test_product_trivial_case_is_base():
    ce = make_counterexample(1 / 6, UNIT)
    space, cert = product_codim_k(ce, 0, 1)
    assert (space.ambient_dim, space.submanifold_dim, space.codimension) == (5, 4, 1)
    assert cert.passed


def test_product_codim_three():
    ce = make_counterexample(0.3, UNIT)
    space, cert = product_codim_k(ce, 2, 3, plane_samples=256)
    assert (space.ambient_dim, space.submanifold_dim, space.codimension) == (9, 6, 3)
    assert cert.passed
    assert cert.assumptions == [PRODUCT_ASSUMPTION]
    mixed = next(s for s in cert.stages if s.name == "mixed_planes_flat")
    assert mixed.value <= 1e-12


def test_product_rejects_bad_input():
    ce = make_counterexample(0.3, UNIT)
    with pytest.raises(DomainError):
        product_codim_k(ce, 1, 0)
    bad = Counterexample(ce.metric, ce.hyperplane, 0.7)
    with pytest.raises(DomainError):
        product_codim_k(bad, 1, 2)
