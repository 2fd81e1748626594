"""Curvature of ``h = f(z)**-2 * (dx_1**2 + ... + dx_m**2 + dz**2)``.

Frame quantities use the h-orthonormal frame ``ebar_a = f * d/dx_a``; the
last index is the ``z`` direction.  The closed-form route writes ``h`` as
``exp(2*tau) * euclid`` with ``tau = -ln f`` and applies the conformal
change formulas on a flat base.  The finite-difference route builds
Christoffel symbols and the Riemann tensor directly from metric components
and knows nothing about conformal structure.

Riemann convention: ``R(X, Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y] Z`` and the
(0,4) tensor ``Rm(W, Z, X, Y) = h(R(W, Z)Y, X)`` so that ``Rm(X, Y, X, Y)`` is the
sectional curvature of an orthonormal pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainError, MarginError, PreconditionError
from .jets import FactorFamily, Jet3

__all__ = [
    "ConformalMetric",
    "PlaneSection",
    "ScanReport",
    "frame_connection",
    "connection_coordinates",
    "coordinate_christoffels_fd",
    "coordinate_riemann_fd",
    "riemann_fd",
    "riemann_conformal",
    "riemann_tensor",
    "ricci_conformal",
    "sectional",
    "sectional_many",
    "power_law_sectional",
    "random_planes",
    "curvature_sign_scan",
]

ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True)
class ConformalMetric:
    ambient_dim: int
    factor: FactorFamily

    def __post_init__(self):
        if self.ambient_dim < 3:
            raise DomainError(f"ambient dimension must be >= 3, got {self.ambient_dim}")

    @property
    def m(self) -> int:
        return self.ambient_dim - 1

    def jet(self, point) -> Jet3:
        return self.factor.jet(_height(point))

    def components(self, point) -> np.ndarray:
        f = self.factor.jet(_height(point)).v0
        return np.eye(self.ambient_dim) / f ** 2


def _height(point) -> float:
    if np.ndim(point) == 0:
        return float(point)
    return float(np.asarray(point)[-1])


def _point(metric: ConformalMetric, point) -> np.ndarray:
    if np.ndim(point) == 0:
        p = np.zeros(metric.ambient_dim)
        p[-1] = float(point)
        return p
    p = np.asarray(point, dtype=float)
    if p.shape != (metric.ambient_dim,):
        raise DomainError(f"point must have {metric.ambient_dim} coordinates")
    return p


def _unit_z(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[-1] = 1.0
    return e


# -- closed-form route ------------------------------------------------------------


def frame_connection(metric: ConformalMetric, z) -> np.ndarray:
    """Table ``C[a, b]`` = frame components of ``nabla_{ebar_a} ebar_b``.

    Obtained from the conformal change of connection with ``tau = -ln f``:
    ``nabla_{ebar_a} ebar_b = f' (delta_ab ebar_z - delta_bz ebar_a)``.
    """
    n = metric.ambient_dim
    f1 = metric.jet(z).v1
    C = np.zeros((n, n, n))
    for a in range(n):
        C[a, a, n - 1] += f1
        C[a, n - 1, a] -= f1
    return C


def connection_coordinates(metric: ConformalMetric, z) -> np.ndarray:
    """Coordinate Christoffels ``G[c, a, b]`` converted from :func:`frame_connection`."""
    n = metric.ambient_dim
    f, f1 = metric.jet(z).v0, metric.jet(z).v1
    C = frame_connection(metric, z)
    G = np.transpose(C, (2, 0, 1)) / f
    # d/dx_a = ebar_a / f, and ebar_z(1/f) = -f'/f
    for b in range(n):
        G[b, n - 1, b] -= f1 / f
    return G


def _tau_data(metric: ConformalMetric, point) -> tuple[np.ndarray, np.ndarray, Jet3]:
    """Frame-scaled Hessian and gradient of ``tau = -ln f``."""
    n = metric.ambient_dim
    j = metric.jet(point)
    f, f1, f2 = j.v0, j.v1, j.v2
    ez = _unit_z(n)
    hess = (f1 ** 2 - f * f2) * np.outer(ez, ez)
    grad = -f1 * ez
    return hess, grad, j


def riemann_tensor(metric: ConformalMetric, point) -> np.ndarray:
    """Full frame tensor ``Rm[w, z, x, y]`` from the conformal curvature relation."""
    n = metric.ambient_dim
    H, s, _ = _tau_data(metric, point)
    d = np.eye(n)
    ss = float(s @ s)
    R = (
        np.einsum("xz,yw->wzxy", H, d)
        - np.einsum("yz,xw->wzxy", H, d)
        + np.einsum("xz,yw->wzxy", d, H)
        - np.einsum("yz,xw->wzxy", d, H)
        + np.einsum("yz,xw->wzxy", np.outer(s, s) - ss * d, d)
        - np.einsum("xz,yw->wzxy", np.outer(s, s) - ss * d, d)
        + np.einsum("x,yz,w->wzxy", s, d, s)
        - np.einsum("y,xz,w->wzxy", s, d, s)
    )
    return R


def riemann_conformal(metric: ConformalMetric, point, W, Z, X, Y) -> float:
    """``Rm(W, Z, X, Y)`` for frame-component vectors."""
    H, s, _ = _tau_data(metric, point)
    W, Z, X, Y = (np.asarray(v, dtype=float) for v in (W, Z, X, Y))
    g = np.dot
    ss = float(s @ s)
    val = (
        (X @ H @ Z) * g(Y, W)
        - (Y @ H @ Z) * g(X, W)
        + g(X, Z) * (Y @ H @ W)
        - g(Y, Z) * (X @ H @ W)
        + ((Y @ s) * (Z @ s) - g(Y, Z) * ss) * g(X, W)
        - ((X @ s) * (Z @ s) - g(X, Z) * ss) * g(Y, W)
        + ((X @ s) * g(Y, Z) - (Y @ s) * g(X, Z)) * (W @ s)
    )
    return float(val)


def ricci_conformal(metric: ConformalMetric, point, X, Y) -> float:
    """Ricci curvature from the contracted conformal relation, flat base."""
    n = metric.ambient_dim
    H, s, _ = _tau_data(metric, point)
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    lap = float(np.trace(H))
    ss = float(s @ s)
    return float(-(n - 2) * (X @ H @ Y - (X @ s) * (Y @ s)) - (lap + (n - 2) * ss) * (X @ Y))


@dataclass(frozen=True)
class PlaneSection:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if (
            abs(X @ X - 1) > ORTHONORMAL_TOL
            or abs(Y @ Y - 1) > ORTHONORMAL_TOL
            or abs(X @ Y) > ORTHONORMAL_TOL
        ):
            raise PreconditionError("plane section basis must be orthonormal")


def sectional_many(metric: ConformalMetric, z: float, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Sectional curvatures for stacks of orthonormal pairs ``X, Y`` of shape (N, n)."""
    H, s, _ = _tau_data(metric, z)
    hxx = np.einsum("ni,ij,nj->n", X, H, X)
    hyy = np.einsum("ni,ij,nj->n", Y, H, Y)
    sx, sy = X @ s, Y @ s
    return -(hxx + hyy) - (s @ s - sx ** 2 - sy ** 2)


def sectional(metric: ConformalMetric, point, P: Union[PlaneSection, tuple]) -> float:
    """Sectional curvature of the plane ``P`` via the conformal sectional relation."""
    if not isinstance(P, PlaneSection):
        P = PlaneSection(*P)
    return float(sectional_many(metric, _height(point), P.X[None, :], P.Y[None, :])[0])


def power_law_sectional(A: float, B: float, t: float, z: float, vertical_sq: float) -> float:
    """Closed form ``A^2 u^(2t-2) [v t (t-1) - t^2]`` with ``u = Az + B``.

    ``vertical_sq`` is the summed squared ``z``-components of the orthonormal pair.
    """
    u = A * z + B
    return A ** 2 * u ** (2 * t - 2) * (vertical_sq * t * (t - 1) - t ** 2)


# -- finite-difference oracle -----------------------------------------------------

_W4 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_O4 = np.array([-2.0, -1.0, 1.0, 2.0])

MetricLike = Union[ConformalMetric, Callable[[np.ndarray], np.ndarray]]


def _fd_step(point: np.ndarray, rel: float = 1e-4) -> float:
    return rel * max(1.0, float(np.max(np.abs(point))))


def _as_metric_fn(metric: MetricLike, point: np.ndarray, reach: float):
    if isinstance(metric, ConformalMetric):
        z = point[-1]
        if not (metric.factor.contains(z - reach) and metric.factor.contains(z + reach)):
            raise MarginError(f"point z={z!r} within {reach:g} of the domain boundary")
        return metric.components
    return metric


def _derivatives(fn, point: np.ndarray, h: float, richardson: bool) -> np.ndarray:
    """``D[a, ...] = d fn / d x_a`` by the 4th-order central stencil."""

    def once(step):
        out = []
        for a in range(point.size):
            acc = 0.0
            for w, o in zip(_W4, _O4):
                q = point.copy()
                q[a] += o * step
                acc = acc + w * fn(q)
            out.append(acc / step)
        return np.array(out)

    if not richardson:
        return once(h)
    return (16 * once(h / 2) - once(h)) / 15


def _christoffels(fn, point, h, richardson):
    g = fn(point)
    ginv = np.linalg.inv(g)
    dg = _derivatives(fn, point, h, richardson)  # dg[c, a, b] = d_c g_ab
    lower = 0.5 * (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)
    # lower[d, a, b] = 1/2 (d_a g_db + d_b g_da - d_d g_ab)
    G = np.einsum("cd,dab->cab", ginv, lower)
    return 0.5 * (G + np.transpose(G, (0, 2, 1)))


def coordinate_christoffels_fd(metric: MetricLike, point, step: float | None = None,
                               richardson: bool = False) -> np.ndarray:
    """Christoffel symbols ``G[c, a, b]`` from finite differences of the metric components."""
    p = _point(metric, point) if isinstance(metric, ConformalMetric) else np.asarray(point, float)
    h = _fd_step(p) if step is None else step
    fn = _as_metric_fn(metric, p, 2 * h)
    return _christoffels(fn, p, h, richardson)


def coordinate_riemann_fd(metric: MetricLike, point, step: float | None = None) -> np.ndarray:
    """``R[r, s, a, b]`` with ``R(d_a, d_b) d_s = R[r, s, a, b] d_r``, fully numerical."""
    p = _point(metric, point) if isinstance(metric, ConformalMetric) else np.asarray(point, float)
    h = _fd_step(p) if step is None else step
    fn = _as_metric_fn(metric, p, 4 * h)
    G = _christoffels(fn, p, h, False)
    dG = _derivatives(lambda q: _christoffels(fn, q, h, False), p, h, False)
    # dG[a, r, b, s] = d_a G^r_bs
    R = (
        np.einsum("arbs->rsab", dG)
        - np.einsum("bras->rsab", dG)
        + np.einsum("ral,lbs->rsab", G, G)
        - np.einsum("rbl,las->rsab", G, G)
    )
    return R


def riemann_fd(metric: ConformalMetric, point, W, Z, X, Y, step: float | None = None) -> float:
    """``Rm(W, Z, X, Y)`` for frame vectors, evaluated through the FD coordinate tensor."""
    p = _point(metric, point)
    f = metric.jet(p).v0
    R = coordinate_riemann_fd(metric, p, step)
    g = metric.components(p)
    w, zz, x, y = (f * np.asarray(v, dtype=float) for v in (W, Z, X, Y))
    return float(np.einsum("rk,k,rsab,s,a,b->", g, x, R, y, w, zz))


# -- sampling -------------------------------------------------------------------------


def random_planes(rng: np.random.Generator, n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormalized Gaussian pairs, each of shape (count, n)."""
    X = rng.standard_normal((count, n))
    Y = rng.standard_normal((count, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    Y -= np.sum(X * Y, axis=1, keepdims=True) * X
    Y -= np.sum(X * Y, axis=1, keepdims=True) * X
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    return X, Y


@dataclass
class ScanReport:
    max_K: float
    argmax_z: float
    argmax_X: np.ndarray
    argmax_Y: np.ndarray
    seed: int
    n_points: int
    n_planes: int
    per_point_max: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "max_K": self.max_K,
            "argmax_z": self.argmax_z,
            "argmax_plane": [self.argmax_X.tolist(), self.argmax_Y.tolist()],
            "seed": self.seed,
            "n_points": self.n_points,
            "n_planes": self.n_planes,
        }


def curvature_sign_scan(metric: ConformalMetric, z_samples, plane_samples: int = 1024,
                        seed: int = 42) -> ScanReport:
    """Supremum of sectional curvature over sampled heights and random planes.

    The same plane set is reused at every height.  Ties resolve to the
    smallest (point, plane) index.
    """
    z_samples = np.atleast_1d(np.asarray(z_samples, dtype=float))
    if z_samples.size < 1 or plane_samples < 1:
        raise DomainError("curvature scan needs at least one point and one plane")
    rng = np.random.default_rng(seed)
    X, Y = random_planes(rng, metric.ambient_dim, plane_samples)
    K = np.stack([sectional_many(metric, z, X, Y) for z in z_samples])
    flat = int(np.argmax(K))
    i, j = divmod(flat, plane_samples)
    return ScanReport(
        max_K=float(K[i, j]),
        argmax_z=float(z_samples[i]),
        argmax_X=X[j],
        argmax_Y=Y[j],
        seed=seed,
        n_points=int(z_samples.size),
        n_planes=int(plane_samples),
        per_point_max=K.max(axis=1),
    )
