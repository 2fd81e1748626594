"""Biharmonicity residuals for graph hyperplanes and the case classifier."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .curvature import ConformalMetric
from .errors import DomainError
from .hypersurface import Hyperplane, hypersurface_state
from .jets import Jet3, z_grid

__all__ = [
    "CaseLabel",
    "ResidualReport",
    "ZERO_TOL",
    "residual_general",
    "residual_reduced",
    "reduced_to_general",
    "residual_single",
    "residual_single_normalized",
    "jet_scale",
    "case2_residual",
    "classify",
]

ZERO_TOL = 1e-9
H_FLOOR = 1e-12


class CaseLabel(str, enum.Enum):
    MINIMAL = "Minimal"
    RECIPROCAL_HORIZONTAL = "ReciprocalHorizontal"
    SINGLE_EQUATION_M4 = "SingleEquation_m4"
    NOT_BIHARMONIC = "NotBiharmonic"


def jet_scale(fjet: Jet3) -> float:
    """``max(|f^2 f'''|, |f f' f''|, |f'|^3)``: the size of each cubic term."""
    f, f1, f2, f3 = fjet.as_tuple()
    return max(abs(f * f * f3), abs(f * f1 * f2), abs(f1) ** 3)


def _normalize(raw, scale):
    if scale == 0:
        return np.abs(raw)
    return np.abs(raw) / scale


def residual_general(hp: Hyperplane, metric: ConformalMetric, z: float) -> tuple[float, np.ndarray]:
    """Normal and tangential parts of the hypersurface biharmonic system.

    Assembled from the closed-form hypersurface quantities.  The leaves are
    totally umbilical, so ``A(grad H) = H grad H`` and ``grad H^2 = 2 H grad H``.
    """
    st = hypersurface_state(hp, metric, z)
    m = hp.m
    normal = st.lapH - st.H * st.A_norm_sq + st.H * st.ric_normal
    A_gradH = st.H * st.gradH
    grad_H2 = 2 * st.H * st.gradH
    tangential = 2 * A_gradH + 0.5 * m * grad_H2 - 2 * st.H * st.ric_tangential
    return float(normal), tangential


def residual_reduced(hp: Hyperplane, fjet: Jet3) -> tuple[float, np.ndarray]:
    """Both lines of the reduced system in ``f`` and ``k_m`` alone."""
    f, f1, f2, f3 = fjet.as_tuple()
    m, km2 = hp.m, hp.k_m ** 2
    normal = (
        -(1 - km2) * f ** 2 * f3
        - (3 - m + (2 * m - 3) * km2) * f * f1 * f2
        + m * (1 + km2) * f1 ** 3
    )
    tangential = (m - 4) * f * f1 * f2 * hp.coeffs
    return float(normal), tangential


def reduced_to_general(hp: Hyperplane, normal: float, tangential: np.ndarray):
    """Rescale reduced-system lines into the normalization of :func:`residual_general`.

    The reduced lines drop the nonzero factors ``k_m`` (normal) and
    ``-k_m^2 k_i k_{i-1}`` (tangential component ``i``).
    """
    k = hp.k
    return hp.k_m * normal, -(hp.k_m ** 2) * k[1:] * k[:-1] * np.asarray(tangential)


def residual_single(a, fjet: Jet3) -> float:
    """Residual of the m = 4 single equation."""
    a = np.asarray(a, dtype=float)
    if a.shape != (4,):
        raise DomainError("the single equation needs exactly four slope coefficients")
    S = float(a @ a)
    f, f1, f2, f3 = fjet.as_tuple()
    return S * f ** 2 * f3 + (4 - S) * f * f1 * f2 - 4 * (2 + S) * f1 ** 3


def residual_single_normalized(a, fjet: Jet3) -> tuple[float, float]:
    """``(raw, scale_free)`` residual; the second divides by :func:`jet_scale`."""
    raw = residual_single(a, fjet)
    return raw, float(_normalize(raw, jet_scale(fjet)))


def case2_residual(hp: Hyperplane, fjet: Jet3) -> float:
    """``[1 + (m-1)k_m^2] f f'' - m(1 + k_m^2) f'^2`` (horizontal-gradient branch)."""
    f, f1, f2, _ = fjet.as_tuple()
    m, km2 = hp.m, hp.k_m ** 2
    return (1 + (m - 1) * km2) * f * f2 - m * (1 + km2) * f1 ** 2


@dataclass
class ResidualReport:
    case_label: CaseLabel
    proper: bool
    biharmonic: bool
    z: np.ndarray
    normal_residual: np.ndarray       # normalized, per z
    tangential_residual: np.ndarray   # normalized, (len(z), m)
    single_residual: np.ndarray | None
    H: np.ndarray
    tolerance: float
    max_abs_residual: float = field(init=False)

    def __post_init__(self):
        parts = [np.max(self.normal_residual, initial=0.0),
                 np.max(self.tangential_residual, initial=0.0)]
        self.max_abs_residual = float(max(parts))

    def to_dict(self) -> dict:
        return {
            "case_label": self.case_label.value,
            "proper": self.proper,
            "biharmonic": self.biharmonic,
            "max_abs_residual": self.max_abs_residual,
            "max_single_residual": (
                None if self.single_residual is None else float(np.max(self.single_residual))
            ),
            "min_abs_H": float(np.min(np.abs(self.H))),
            "n_samples": int(self.z.size),
            "tolerance": self.tolerance,
        }


def classify(hp: Hyperplane, metric: ConformalMetric, z_samples=None,
             tol: float = ZERO_TOL) -> ResidualReport:
    """Sort a leaf into the biharmonic cases, most degenerate first.

    Order: Minimal (``f' = 0``), ReciprocalHorizontal (``a = 0`` and
    ``f f'' = 2 f'^2``), SingleEquation_m4; anything else is NotBiharmonic.
    """
    hp.check_metric(metric)
    z = z_grid(metric.factor) if z_samples is None else np.atleast_1d(np.asarray(z_samples, float))
    if z.size == 0:
        raise DomainError("classification needs at least one sample height")

    jets = [metric.jet(zz) for zz in z]
    scales = np.array([jet_scale(j) for j in jets])
    normal = np.empty(z.size)
    tangential = np.empty((z.size, hp.m))
    H = np.empty(z.size)
    for n, zz in enumerate(z):
        nr, tr = residual_general(hp, metric, zz)
        normal[n] = _normalize(nr, scales[n])
        tangential[n] = _normalize(tr, scales[n])
        H[n] = -hp.k_m * jets[n].v1
    single = None
    if hp.m == 4:
        single = np.array([residual_single_normalized(hp.coeffs, j)[1] for j in jets])

    biharmonic = bool(np.all(normal <= tol) and np.all(tangential <= tol))
    flat = all(abs(j.v1) <= H_FLOOR * abs(j.v0) for j in jets)
    horizontal = not np.any(hp.coeffs)
    reciprocal = horizontal and all(
        abs(j.v0 * j.v2 - 2 * j.v1 ** 2) <= tol * max(abs(j.v0 * j.v2), 2 * j.v1 ** 2)
        for j in jets
    )
    if flat:
        label = CaseLabel.MINIMAL
    elif reciprocal:
        label = CaseLabel.RECIPROCAL_HORIZONTAL
    elif single is not None and np.all(single <= tol):
        label = CaseLabel.SINGLE_EQUATION_M4
    else:
        label = CaseLabel.NOT_BIHARMONIC
    proper = biharmonic and label is not CaseLabel.NOT_BIHARMONIC and bool(np.any(np.abs(H) > H_FLOOR))
    return ResidualReport(
        case_label=label,
        proper=proper,
        biharmonic=biharmonic,
        z=z,
        normal_residual=normal,
        tangential_residual=tangential,
        single_residual=single,
        H=H,
        tolerance=tol,
    )
