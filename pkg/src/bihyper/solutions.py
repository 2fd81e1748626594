"""Counterexample construction and certification.

Builds tilted hyperplanes in ``((Az+B)**-2t) * euclid`` on the upper half of
R^5, certifies them (single-equation residual, nonzero mean curvature,
negative sectional curvature), explores the single equation as an ODE, and
lifts a certified leaf to higher codimension by a Euclidean product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .biharmonic import (
    H_FLOOR,
    ZERO_TOL,
    case2_residual,
    classify,
    jet_scale,
    residual_general,
    residual_single_normalized,
)
from .curvature import ConformalMetric, curvature_sign_scan, random_planes, riemann_tensor
from .errors import DegenerateInputError, DomainError
from .hypersurface import Hyperplane, mean_curvature
from .jets import FactorFamily, Jet3, PowerLaw, Reciprocal, Tabulated, z_grid

__all__ = [
    "Stage",
    "Certificate",
    "Counterexample",
    "ProductSpace",
    "OdeTrajectory",
    "constraint_radius",
    "make_counterexample",
    "certify_counterexample",
    "reciprocal_leaf_check",
    "ode_solve_single",
    "product_riemann",
    "product_codim_k",
    "PRODUCT_ASSUMPTION",
]

PRODUCT_ASSUMPTION = (
    "external result assumed: a product of a proper biharmonic immersion with a "
    "totally geodesic embedding is proper biharmonic; not re-verified"
)


@dataclass
class Stage:
    name: str
    producer: str
    value: Any
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "producer": self.producer,
            "value": self.value,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "detail": self.detail,
        }


@dataclass
class Certificate:
    subject: str
    stages: list[Stage]
    assumptions: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stages)

    @property
    def failed_stage(self) -> str | None:
        for s in self.stages:
            if not s.passed:
                return s.name
        return None

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "pass": self.passed,
            "failed_stage": self.failed_stage,
            "assumptions": list(self.assumptions),
            "stages": [s.to_dict() for s in self.stages],
        }


def constraint_radius(t: float) -> float:
    """Radius of the coefficient sphere ``|a|^2 = 2t / (1 - 2t)``."""
    if not 0 < t < 0.5:
        raise DomainError(f"t must lie in (0, 1/2), got {t!r}")
    return math.sqrt(2 * t / (1 - 2 * t))


@dataclass(frozen=True)
class Counterexample:
    """A candidate leaf; ``t`` is set when the factor is a power law.

    Membership of ``a`` in the constraint sphere is not enforced here: it is
    exactly what stage (i) of :func:`certify_counterexample` tests.
    """

    metric: ConformalMetric
    hyperplane: Hyperplane
    t: float | None = None

    def __post_init__(self):
        self.hyperplane.check_metric(self.metric)
        if self.hyperplane.m != 4:
            raise DomainError("counterexample leaves live in dimension 5 (m = 4)")


def make_counterexample(t: float, direction: Sequence[float], c: float = 0.0,
                        A: float = 1.0, B: float = 1.0) -> Counterexample:
    r = constraint_radius(t)
    if not (A > 0 and B > 0):
        raise DomainError("A and B must be positive")
    d = np.asarray(direction, dtype=float)
    if d.shape != (4,):
        raise DomainError("direction must be a 4-vector")
    if abs(np.linalg.norm(d) - 1) > 1e-12:
        raise DomainError(f"direction must be a unit vector, |d| = {np.linalg.norm(d)!r}")
    return Counterexample(
        metric=ConformalMetric(5, PowerLaw(A, B, t)),
        hyperplane=Hyperplane(tuple(r * d), c),
        t=t,
    )


def certify_counterexample(ce: Counterexample, z_samples=None, plane_samples: int = 1024,
                           seed: int = 42, tol: float = ZERO_TOL) -> Certificate:
    """Stages: (i) single-equation residual, (ii) properness, (iii) negative curvature."""
    z = z_grid(ce.metric.factor) if z_samples is None else np.asarray(z_samples, dtype=float)
    hp, metric = ce.hyperplane, ce.metric
    jets = [metric.jet(zz) for zz in z]

    single = np.array([residual_single_normalized(hp.coeffs, j)[1] for j in jets])
    worst = int(np.argmax(single))
    report = classify(hp, metric, z, tol)
    s1 = Stage(
        "single_equation",
        "biharmonic.residual_single",
        float(single[worst]),
        tol,
        bool(np.all(single <= tol)),
        {"argmax_z": float(z[worst]), "sum_a_sq": hp.sum_sq, "case_label": report.case_label.value,
         "n_samples": int(z.size)},
    )
    if ce.t is not None and 0 < ce.t < 0.5:
        s1.detail["constraint_sum_a_sq"] = constraint_radius(ce.t) ** 2

    H = np.array([mean_curvature(hp, metric, zz) for zz in z])
    s2 = Stage(
        "proper",
        "hypersurface.mean_curvature",
        float(np.min(np.abs(H))),
        H_FLOOR,
        bool(np.all(np.abs(H) > H_FLOOR)),
        {"max_abs_H": float(np.max(np.abs(H)))},
    )

    scan = curvature_sign_scan(metric, z, plane_samples, seed)
    s3 = Stage(
        "negative_curvature",
        "curvature.curvature_sign_scan",
        scan.max_K,
        0.0,
        scan.max_K < 0,
        scan.to_dict(),
    )
    return Certificate("counterexample", [s1, s2, s3])


def reciprocal_leaf_check(A: float, B: float, m: int, factor: FactorFamily | None = None,
                          z_samples=None, tol: float = ZERO_TOL) -> Certificate:
    """Horizontal leaves (``a = 0``) under ``f = 1/(Az+B)`` are proper biharmonic.

    ``factor`` substitutes a different conformal factor for negative controls.
    """
    if m < 2:
        raise DomainError("m must be >= 2")
    fam = Reciprocal(A, B) if factor is None else factor
    metric = ConformalMetric(m + 1, fam)
    hp = Hyperplane((0.0,) * m)
    z = z_grid(fam) if z_samples is None else np.asarray(z_samples, dtype=float)
    jets = [metric.jet(zz) for zz in z]

    reduced = []
    general = []
    for zz, j in zip(z, jets):
        sc = max(abs(j.v0 * j.v2), 2 * j.v1 ** 2)
        reduced.append(abs(case2_residual(hp, j)) / sc if sc else 0.0)
        nr, tr = residual_general(hp, metric, zz)
        s = jet_scale(j)
        general.append(max(abs(nr), float(np.max(np.abs(tr)))) / s if s else 0.0)
    H = np.array([mean_curvature(hp, metric, zz) for zz in z])
    stages = [
        Stage("horizontal_reduced", "biharmonic.case2_residual", float(max(reduced)), tol,
              max(reduced) <= tol),
        Stage("residual_general", "biharmonic.residual_general", float(max(general)), tol,
              max(general) <= tol),
        Stage("proper", "hypersurface.mean_curvature", float(np.min(np.abs(H))), H_FLOOR,
              bool(np.all(np.abs(H) > H_FLOOR))),
    ]
    return Certificate("reciprocal_leaf", stages)


# -- ODE exploration -------------------------------------------------------------------


@dataclass
class OdeTrajectory:
    sum_a_sq: float
    z: np.ndarray
    state: np.ndarray        # (N, 3): f, f', f''
    f3: np.ndarray
    residual: np.ndarray     # normalized single-equation residual per sample
    blow_up: bool
    blow_down: bool
    metadata: dict
    dense: Any = field(repr=False, default=None)

    @property
    def complete(self) -> bool:
        return not (self.blow_up or self.blow_down)

    def jet(self, z: float) -> Jet3:
        y = self.dense(z)
        f3 = _single_f3(self.sum_a_sq, *y)
        return Jet3(float(y[0]), float(y[1]), float(y[2]), float(f3))

    def as_family(self, error_bound: float | None = None) -> Tabulated:
        lo, hi = sorted((float(self.z[0]), float(self.z[-1])))
        bound = 100 * self.metadata["rtol"] if error_bound is None else error_bound
        return Tabulated(self.jet, lo, hi, bound)


def _single_f3(S, f, f1, f2):
    return (-(4 - S) * f * f1 * f2 + 4 * (2 + S) * f1 ** 3) / (S * f * f)


def ode_solve_single(sum_a_sq: float, initial: Sequence[float], z_range: tuple[float, float],
                     tolerance: float = 1e-10, f_min: float = 1e-8,
                     f_max: float = 1e12) -> OdeTrajectory:
    """Integrate the single equation solved for ``f'''`` with Dormand-Prince 5(4).

    Stops early when ``f`` falls to ``f_min`` (blow-down) or exceeds
    ``f_max`` (blow-up).
    """
    S = float(sum_a_sq)
    if S <= 0:
        raise DegenerateInputError(
            "sum of squared slopes must be positive; the horizontal case has no f''' term"
        )
    y0 = np.asarray(initial, dtype=float)
    if y0.shape != (3,) or not y0[0] > 0:
        raise DomainError("initial data must be (f, f', f'') with f > 0")
    z0, z1 = map(float, z_range)

    def rhs(z, y):
        return [y[1], y[2], _single_f3(S, *y)]

    def low(z, y):
        return y[0] - f_min

    def high(z, y):
        return y[0] - f_max

    low.terminal = high.terminal = True
    sol = solve_ivp(rhs, (z0, z1), y0, method="RK45", rtol=tolerance, atol=tolerance,
                    dense_output=True, events=[low, high])
    zs, ys = sol.t, sol.y.T
    f3 = np.array([_single_f3(S, *y) for y in ys])
    residual = []
    for y, d3 in zip(ys, f3):
        j = Jet3(y[0], y[1], y[2], d3)
        raw = S * j.v0 ** 2 * d3 + (4 - S) * j.v0 * j.v1 * j.v2 - 4 * (2 + S) * j.v1 ** 3
        sc = jet_scale(j)
        residual.append(abs(raw) / sc if sc else abs(raw))
    blow_down = bool(sol.t_events[0].size)
    blow_up = bool(sol.t_events[1].size) or sol.status == -1 or not np.all(np.isfinite(ys))
    steps = np.abs(np.diff(zs)) if zs.size > 1 else np.array([0.0])
    meta = {
        "method": "RK45 (Dormand-Prince)",
        "order": "5(4)",
        "rtol": tolerance,
        "atol": tolerance,
        "f_min": f_min,
        "nfev": int(sol.nfev),
        "n_steps": int(zs.size - 1),
        "min_step": float(steps.min()),
        "max_step": float(steps.max()),
        "error_estimate": tolerance,
        "message": sol.message,
    }
    return OdeTrajectory(S, zs, ys, f3, np.array(residual), blow_up, blow_down, meta, sol.sol)


# -- codimension-k products ------------------------------------------------------------


@dataclass(frozen=True)
class ProductSpace:
    """``(R^5_+ x R^(n+k-1), h + h0)`` containing ``R^4 x R^n`` with codimension ``k``."""

    base: Counterexample
    n: int
    k: int

    def __post_init__(self):
        if self.k < 1 or self.n < 0:
            raise DomainError("need k >= 1 and n >= 0")

    @property
    def euclidean_dim(self) -> int:
        return self.n + self.k - 1

    @property
    def ambient_dim(self) -> int:
        return self.base.metric.ambient_dim + self.euclidean_dim

    @property
    def submanifold_dim(self) -> int:
        return self.base.hyperplane.m + self.n

    @property
    def codimension(self) -> int:
        return self.ambient_dim - self.submanifold_dim


def product_riemann(base: ConformalMetric, z: float, euclidean_dim: int) -> np.ndarray:
    """Frame Riemann tensor of the product metric: base block, zero elsewhere."""
    nb = base.ambient_dim
    N = nb + euclidean_dim
    R = np.zeros((N, N, N, N))
    R[:nb, :nb, :nb, :nb] = riemann_tensor(base, z)
    return R


def product_codim_k(ce: Counterexample, n: int, k: int, z_samples=None,
                    plane_samples: int = 1024, seed: int = 42,
                    tol: float = ZERO_TOL) -> tuple[ProductSpace, Certificate]:
    space = ProductSpace(ce, n, k)
    if ce.t is not None and not 0 < ce.t < 0.5:
        raise DomainError(f"t must lie in (0, 1/2), got {ce.t!r}")
    z = z_grid(ce.metric.factor) if z_samples is None else np.asarray(z_samples, dtype=float)
    base_cert = certify_counterexample(ce, z, plane_samples, seed, tol)
    stages = [Stage("base_counterexample", "solutions.certify_counterexample", base_cert.passed,
                    tol, base_cert.passed, {"failed_stage": base_cert.failed_stage})]
    base_max = base_cert.stages[2].value

    nb, ne = ce.metric.ambient_dim, space.euclidean_dim
    N = nb + ne
    rng = np.random.default_rng(seed)
    mixed_max = 0.0
    flat_max = 0.0
    full_max = -math.inf
    for zz in z:
        R = product_riemann(ce.metric, zz, ne)
        if ne:
            Xb, _ = random_planes(rng, nb, plane_samples)
            Ye, Ze = random_planes(rng, ne, plane_samples) if ne >= 2 else (
                np.sign(rng.standard_normal((plane_samples, 1))), None)
            X = np.hstack([Xb, np.zeros((plane_samples, ne))])
            Y = np.hstack([np.zeros((plane_samples, nb)), Ye])
            Km = np.einsum("wzxy,nw,nz,nx,ny->n", R, X, Y, X, Y)
            mixed_max = max(mixed_max, float(np.max(np.abs(Km))))
            if ne >= 2:
                Y2 = np.hstack([np.zeros((plane_samples, nb)), Ze])
                Ke = np.einsum("wzxy,nw,nz,nx,ny->n", R, Y, Y2, Y, Y2)
                flat_max = max(flat_max, float(np.max(np.abs(Ke))))
        X, Y = random_planes(rng, N, plane_samples)
        Kf = np.einsum("wzxy,nw,nz,nx,ny->n", R, X, Y, X, Y)
        full_max = max(full_max, float(np.max(Kf)))

    stages += [
        Stage("base_planes_negative", "curvature.curvature_sign_scan", base_max, 0.0, base_max < 0),
        Stage("euclidean_planes_flat", "solutions.product_riemann", flat_max, 1e-12,
              flat_max <= 1e-12, {"euclidean_dim": ne}),
        Stage("mixed_planes_flat", "solutions.product_riemann", mixed_max, 1e-12,
              mixed_max <= 1e-12),
        Stage("product_nonpositive", "solutions.product_riemann", full_max, 1e-12,
              full_max <= 1e-12, {"n_planes_per_point": plane_samples, "seed": seed}),
    ]
    m = ce.hyperplane.m
    Hn = np.array([abs(mean_curvature(ce.hyperplane, ce.metric, zz)) for zz in z]) * m / (m + n)
    stages.append(Stage("proper", "hypersurface.mean_curvature", float(Hn.min()), H_FLOOR,
                        bool(np.all(Hn > H_FLOOR)),
                        {"note": "norm of the product mean curvature vector m|H|/(m+n)"}))
    detail = {"ambient_dim": space.ambient_dim, "submanifold_dim": space.submanifold_dim,
              "codimension": space.codimension}
    stages[0].detail.update(detail)
    return space, Certificate("product", stages, [PRODUCT_ASSUMPTION])
