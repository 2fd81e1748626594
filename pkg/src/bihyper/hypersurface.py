"""Graph hyperplanes ``z = a . x + c`` in the conformally flat space.

Every vector is carried by its components in the h-orthonormal frame
``ebar_a = f * d/dx_a`` (last slot is ``z``), so inner products are plain
dot products.  The adapted frame has constant components, which makes
covariant derivatives along it purely algebraic in the connection table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curvature import ConformalMetric, coordinate_christoffels_fd, frame_connection
from .errors import DegenerateInputError, DomainError
from .jets import sigma_jet

__all__ = [
    "Hyperplane",
    "AdaptedFrame",
    "HypersurfaceState",
    "adapted_frame",
    "natural_frame",
    "gram_schmidt_oracle",
    "align_to_pivots",
    "induction_sum",
    "mean_curvature",
    "shape_operator_norm_sq",
    "second_fundamental_form",
    "grad_H",
    "laplacian_H",
    "ricci_normal",
    "ricci_tangential",
    "ricci_normal_from_pieces",
    "ricci_tangential_from_pieces",
    "hypersurface_state",
    "grad_H_fd",
    "shape_operator_norm_sq_fd",
    "laplacian_H_fd",
]


@dataclass(frozen=True)
class Hyperplane:
    a: tuple
    c: float = 0.0

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        if len(a) < 2:
            raise DomainError("hyperplane needs m >= 2 slope coefficients")
        if not all(np.isfinite(a)) or not np.isfinite(self.c):
            raise DomainError("hyperplane coefficients must be finite")
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array(self.a)

    @property
    def sum_sq(self) -> float:
        return float(np.sum(self.coeffs ** 2))

    @property
    def k(self) -> np.ndarray:
        """``k[0] = 1`` and ``k[i] = (1 + a_1^2 + ... + a_i^2)**-1/2``."""
        return 1.0 / np.sqrt(1.0 + np.concatenate([[0.0], np.cumsum(self.coeffs ** 2)]))

    @property
    def k_m(self) -> float:
        return float(self.k[-1])

    def check_metric(self, metric: ConformalMetric):
        if metric.ambient_dim != self.m + 1:
            raise DomainError(
                f"hyperplane with m={self.m} needs ambient dimension {self.m + 1}, "
                f"got {metric.ambient_dim}"
            )


def induction_sum(hp: Hyperplane) -> float:
    """``sum_i a_i^2 k_i^2 k_{i-1}^2``; equals ``1 - k_m^2``."""
    k = hp.k
    return float(np.sum(hp.coeffs ** 2 * k[1:] ** 2 * k[:-1] ** 2))


@dataclass(frozen=True)
class AdaptedFrame:
    tangent: np.ndarray  # (m, m+1), row i is e_{i+1}
    normal: np.ndarray   # (m+1,)

    @property
    def vectors(self) -> np.ndarray:
        return np.vstack([self.tangent, self.normal])

    def gram(self) -> np.ndarray:
        V = self.vectors
        return V @ V.T


def adapted_frame(hp: Hyperplane) -> AdaptedFrame:
    a, k, m = hp.coeffs, hp.k, hp.m
    E = np.zeros((m, m + 1))
    for i in range(1, m + 1):
        ai, ki, kp = a[i - 1], k[i], k[i - 1]
        E[i - 1, : i - 1] = -ai * ki * kp * a[: i - 1]
        E[i - 1, i - 1] = ki / kp
        E[i - 1, m] = ai * ki * kp
    xi = np.append(a * k[m], -k[m])
    return AdaptedFrame(E, xi)


def natural_frame(hp: Hyperplane) -> np.ndarray:
    """Rows ``ebar_i + a_i ebar_z`` followed by the normal ``sum a_j ebar_j - ebar_z``."""
    m = hp.m
    V = np.zeros((m + 1, m + 1))
    V[:m, :m] = np.eye(m)
    V[:m, m] = hp.coeffs
    V[m, :m] = hp.coeffs
    V[m, m] = -1.0
    return V


def gram_schmidt_oracle(vectors: Sequence, rtol: float = 1e-12) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Raises :class:`DegenerateInputError` when a vector is (numerically) in the
    span of its predecessors.
    """
    V = np.array(vectors, dtype=float)
    Q = np.zeros_like(V)
    for j in range(V.shape[0]):
        v = V[j].copy()
        scale = np.linalg.norm(v)
        for _ in range(2):
            for i in range(j):
                v -= (Q[i] @ v) * Q[i]
        nv = np.linalg.norm(v)
        if scale == 0 or nv <= rtol * scale:
            raise DegenerateInputError(f"vector {j} is linearly dependent on its predecessors")
        Q[j] = v / nv
    return Q


def align_to_pivots(Q: np.ndarray) -> np.ndarray:
    """Flip each row so that its diagonal (pivot) component is positive."""
    Q = np.array(Q, dtype=float)
    for i in range(min(Q.shape)):
        if Q[i, i] < 0:
            Q[i] = -Q[i]
    return Q


def mean_curvature(hp: Hyperplane, metric: ConformalMetric, z: float) -> float:
    hp.check_metric(metric)
    return -hp.k_m * metric.jet(z).v1


def shape_operator_norm_sq(hp: Hyperplane, metric: ConformalMetric, z: float) -> float:
    hp.check_metric(metric)
    return hp.m * hp.k_m ** 2 * metric.jet(z).v1 ** 2


def second_fundamental_form(hp: Hyperplane, metric: ConformalMetric, z: float) -> np.ndarray:
    """``B[i, j] = h(nabla_{e_i} e_j, xi)`` from the ambient connection table."""
    hp.check_metric(metric)
    fr = adapted_frame(hp)
    C = frame_connection(metric, z)
    return np.einsum("ia,jb,abc,c->ij", fr.tangent, fr.tangent, C, fr.normal)


def grad_H(hp: Hyperplane, metric: ConformalMetric, z: float) -> np.ndarray:
    """Components of ``grad_g H`` in the adapted tangent basis."""
    hp.check_metric(metric)
    j = metric.jet(z)
    k = hp.k
    return -hp.coeffs * k[1:] * k[:-1] * hp.k_m * j.v0 * j.v2


def laplacian_H(hp: Hyperplane, metric: ConformalMetric, z: float) -> float:
    hp.check_metric(metric)
    f, f1, f2, f3 = metric.jet(z).as_tuple()
    km, m = hp.k_m, hp.m
    return -(1 - km ** 2) * km * ((2 - m) * f * f1 * f2 + f ** 2 * f3)


def ricci_normal(hp: Hyperplane, metric: ConformalMetric, z: float) -> float:
    hp.check_metric(metric)
    f, f1, f2, _ = metric.jet(z).as_tuple()
    km, m = hp.k_m, hp.m
    return (1 + (m - 1) * km ** 2) * f * f2 - m * f1 ** 2


def ricci_tangential(hp: Hyperplane, metric: ConformalMetric, z: float) -> np.ndarray:
    return (hp.m - 1) * grad_H(hp, metric, z)


def _sigma_pieces(hp: Hyperplane, metric: ConformalMetric, z: float) -> dict:
    """Ingredients of the ambient Ricci terms, each computed from sigma's jet."""
    n = metric.ambient_dim
    fj = metric.jet(z)
    sj = sigma_jet(fj)
    f = fj.v0
    C = frame_connection(metric, z)
    # ebar_a(sigma) = f sigma' delta_az ; ebar_z(ebar_z(sigma)) = f (f sigma')'
    dsig = np.zeros(n)
    dsig[-1] = f * sj.v1
    ddsig = np.zeros((n, n))
    ddsig[-1, -1] = f * (fj.v1 * sj.v1 + f * sj.v2)
    hess = ddsig - np.einsum("abc,c->ab", C, dsig)
    fr = adapted_frame(hp)
    xi = fr.normal
    return {
        "lap_sigma": float(np.trace(hess)),
        "hess_xi_xi": float(xi @ hess @ xi),
        "grad_sigma": dsig,
        "grad_sigma_sq": float(dsig @ dsig),
        "xi_sigma": float(xi @ dsig),
        "hess": hess,
        "frame": fr,
        "f": f,
    }


def ricci_normal_from_pieces(hp: Hyperplane, metric: ConformalMetric, z: float) -> float:
    """``Ric(xi, xi)`` assembled from the Laplacian, Hessian and gradient of sigma."""
    hp.check_metric(metric)
    p = _sigma_pieces(hp, metric, z)
    return p["lap_sigma"] + (hp.m - 1) * (p["hess_xi_xi"] - p["xi_sigma"] ** 2 + p["grad_sigma_sq"])


def ricci_tangential_from_pieces(hp: Hyperplane, metric: ConformalMetric, z: float) -> np.ndarray:
    """Tangential ``Ric(xi)`` from ``grad(xi sigma) - xi(sigma) grad sigma + A grad sigma``."""
    hp.check_metric(metric)
    p = _sigma_pieces(hp, metric, z)
    E = p["frame"].tangent
    xi = p["frame"].normal
    # xi(sigma) = xi^z f sigma'(z) depends on z only, so e_i(xi sigma) = e_i^z f d/dz(xi sigma)
    fj = metric.jet(z)
    sj = sigma_jet(fj)
    d_xi_sigma = xi[-1] * (fj.v1 * sj.v1 + fj.v0 * sj.v2)
    grad_xi_sigma = E[:, -1] * p["f"] * d_xi_sigma
    grad_sigma_t = E @ p["grad_sigma"]
    H = mean_curvature(hp, metric, z)
    return (hp.m - 1) * (grad_xi_sigma - p["xi_sigma"] * grad_sigma_t + H * grad_sigma_t)


@dataclass(frozen=True)
class HypersurfaceState:
    H: float
    A_norm_sq: float
    gradH: np.ndarray
    lapH: float
    ric_normal: float
    ric_tangential: np.ndarray


def hypersurface_state(hp: Hyperplane, metric: ConformalMetric, z: float) -> HypersurfaceState:
    return HypersurfaceState(
        H=mean_curvature(hp, metric, z),
        A_norm_sq=shape_operator_norm_sq(hp, metric, z),
        gradH=grad_H(hp, metric, z),
        lapH=laplacian_H(hp, metric, z),
        ric_normal=ricci_normal(hp, metric, z),
        ric_tangential=ricci_tangential(hp, metric, z),
    )


# -- finite-difference oracles ------------------------------------------------------


def _mean_curvature_field(hp: Hyperplane, metric: ConformalMetric):
    km = hp.k_m
    return lambda p: -km * metric.factor.jet(float(p[-1])).v1


def _directional(fn, p: np.ndarray, u: np.ndarray, h: float):
    return (fn(p - 2 * h * u) - 8 * fn(p - h * u) + 8 * fn(p + h * u) - fn(p + 2 * h * u)) / (12 * h)


def grad_H_fd(hp: Hyperplane, metric: ConformalMetric, z: float, step: float = 1e-4) -> np.ndarray:
    """``e_i(H)`` by differentiating the mean-curvature field along each ``e_i``."""
    hp.check_metric(metric)
    p = np.zeros(metric.ambient_dim)
    p[-1] = z
    f = metric.jet(z).v0
    Hf = _mean_curvature_field(hp, metric)
    E = adapted_frame(hp).tangent
    return np.array([_directional(Hf, p, f * e, step) for e in E])


def shape_operator_norm_sq_fd(hp: Hyperplane, metric: ConformalMetric, z: float,
                              step: float = 1e-4) -> float:
    """``sum_i |nabla_{e_i} xi|^2`` with derivatives and Christoffels taken numerically."""
    hp.check_metric(metric)
    n = metric.ambient_dim
    p = np.zeros(n)
    p[-1] = z
    f = metric.jet(z).v0
    fr = adapted_frame(hp)
    xi_hat = fr.normal
    field = lambda q: metric.factor.jet(float(q[-1])).v0 * xi_hat  # coordinate components
    G = coordinate_christoffels_fd(metric, p)
    V = field(p)
    total = 0.0
    for e in fr.tangent:
        u = f * e
        dV = _directional(field, p, u, step) + np.einsum("cab,a,b->c", G, u, V)
        total += float(dV @ metric.components(p) @ dV)
    return total


def laplacian_H_fd(hp: Hyperplane, metric: ConformalMetric, z: float, step: float = 1e-3) -> float:
    """Laplace-Beltrami of ``H`` on the leaf in graph coordinates ``x``.

    Uses ``|g|^(-1/2) d_i(|g|^(1/2) g^ij d_j u)`` with central differences; the
    induced metric is ``f(z(x))**-2 (I + a a^T)``.
    """
    hp.check_metric(metric)
    a, m, S = hp.coeffs, hp.m, hp.sum_sq
    Hf = _mean_curvature_field(hp, metric)
    z0 = z

    def height(x):
        return z0 + a @ x

    def u(x):
        p = np.zeros(m + 1)
        p[-1] = height(x)
        return Hf(p)

    def sqrt_det(x):
        f = metric.factor.jet(height(x)).v0
        return np.sqrt(f ** (-2 * m) * (1 + S))

    def inv_metric(x):
        f = metric.factor.jet(height(x)).v0
        return f ** 2 * (np.eye(m) - np.outer(a, a) / (1 + S))

    def grad(fn, x):
        out = np.zeros(m)
        for i in range(m):
            d = np.zeros(m)
            d[i] = step
            out[i] = (fn(x + d) - fn(x - d)) / (2 * step)
        return out

    def flux(x):
        return sqrt_det(x) * inv_metric(x) @ grad(u, x)

    x0 = np.zeros(m)
    div = 0.0
    for i in range(m):
        d = np.zeros(m)
        d[i] = step
        div += (flux(x0 + d)[i] - flux(x0 - d)[i]) / (2 * step)
    return float(div / sqrt_det(x0))
