"""Third-order jets of the conformal factor ``f(z)`` and of ``sigma = ln f``.

A :class:`Jet3` stores ``(v0, v1, v2, v3)``, the value and first three
derivatives with respect to ``z``.  Arithmetic propagates derivatives
exactly (Leibniz / Faa di Bruno truncated at order three), so composite
factors can be built from elementary jets without symbolic algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "Jet3",
    "FactorFamily",
    "Constant",
    "PowerLaw",
    "Reciprocal",
    "Tabulated",
    "eval_f_jet",
    "sigma_jet",
]


@dataclass(frozen=True)
class Jet3:
    v0: float
    v1: float = 0.0
    v2: float = 0.0
    v3: float = 0.0

    @classmethod
    def variable(cls, z: float) -> "Jet3":
        return cls(float(z), 1.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.v0, self.v1, self.v2, self.v3)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.as_tuple())

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.v0 + other.v0, self.v1 + other.v1,
                        self.v2 + other.v2, self.v3 + other.v3)
        return Jet3(self.v0 + other, self.v1, self.v2, self.v3)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.v0, -self.v1, -self.v2, -self.v3)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet3):
            a, b = self, other
            return Jet3(
                a.v0 * b.v0,
                a.v1 * b.v0 + a.v0 * b.v1,
                a.v2 * b.v0 + 2 * a.v1 * b.v1 + a.v0 * b.v2,
                a.v3 * b.v0 + 3 * a.v2 * b.v1 + 3 * a.v1 * b.v2 + a.v0 * b.v3,
            )
        return Jet3(self.v0 * other, self.v1 * other, self.v2 * other, self.v3 * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def compose(self, d0: float, d1: float, d2: float, d3: float) -> "Jet3":
        """Jet of ``g(self)`` given ``g`` and its first three derivatives at ``self.v0``."""
        u1, u2, u3 = self.v1, self.v2, self.v3
        return Jet3(
            d0,
            d1 * u1,
            d2 * u1 ** 2 + d1 * u2,
            d3 * u1 ** 3 + 3 * d2 * u1 * u2 + d1 * u3,
        )

    def reciprocal(self) -> "Jet3":
        x = self.v0
        return self.compose(1 / x, -1 / x ** 2, 2 / x ** 3, -6 / x ** 4)

    def log(self) -> "Jet3":
        x = self.v0
        if not x > 0:
            raise DomainError(f"log of non-positive value {x!r}")
        return self.compose(math.log(x), 1 / x, -1 / x ** 2, 2 / x ** 3)

    def __pow__(self, p: float) -> "Jet3":
        x = self.v0
        if not x > 0:
            raise DomainError(f"real power of non-positive value {x!r}")
        return self.compose(
            x ** p,
            p * x ** (p - 1),
            p * (p - 1) * x ** (p - 2),
            p * (p - 1) * (p - 2) * x ** (p - 3),
        )


class FactorFamily:
    """Base class for conformal factor families ``f(z)``.

    Subclasses define ``domain`` as an open interval ``(lo, hi)`` and
    ``_jet(z)`` returning the exact third-order jet of ``f`` at ``z``.
    """

    error_bound: float = 0.0

    @property
    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def contains(self, z: float) -> bool:
        lo, hi = self.domain
        return lo < z < hi

    def jet(self, z: float) -> Jet3:
        if not self.contains(z):
            raise DomainError(f"z={z!r} outside domain {self.domain} of {self!r}")
        return self._jet(float(z))

    def _jet(self, z: float) -> Jet3:
        raise NotImplementedError

    def formula(self, z: float) -> Jet3:
        """Closed-form jet without the domain check (valid wherever the expression is real)."""
        return self._jet(float(z))

    def grid_bounds(self) -> tuple[float, float]:
        """Interval from which default z-grids are drawn (log spaced)."""
        lo, hi = self.domain
        lo, hi = max(lo, 0.1), min(hi, 10.0)
        if not lo < hi:
            raise DomainError(f"no default grid for domain {self.domain}")
        return (lo, hi)


@dataclass(frozen=True)
class Constant(FactorFamily):
    f0: float

    def __post_init__(self):
        if not self.f0 > 0:
            raise DomainError(f"constant factor must be positive, got {self.f0!r}")

    def _jet(self, z):
        return Jet3(self.f0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PowerLaw(FactorFamily):
    """``f(z) = (A z + B)**t`` on the upper half space ``z > 0``."""

    A: float
    B: float
    t: float

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0):
            raise DomainError(f"power law needs A > 0 and B > 0, got A={self.A!r}, B={self.B!r}")

    @property
    def domain(self):
        return (0.0, math.inf)

    def _jet(self, z):
        A, B, t = self.A, self.B, self.t
        u = A * z + B
        return Jet3(
            u ** t,
            t * A * u ** (t - 1),
            t * (t - 1) * A ** 2 * u ** (t - 2),
            t * (t - 1) * (t - 2) * A ** 3 * u ** (t - 3),
        )

    def grid_bounds(self):
        return (self.B / (10 * self.A), 10 * (1 + self.B) / self.A)


@dataclass(frozen=True)
class Reciprocal(FactorFamily):
    """``f(z) = 1 / (A z + B)`` wherever ``A z + B > 0``."""

    A: float
    B: float

    def __post_init__(self):
        if self.A == 0 and not self.B > 0:
            raise DomainError("reciprocal factor with A = 0 needs B > 0")

    @property
    def domain(self):
        if self.A > 0:
            return (-self.B / self.A, math.inf)
        if self.A < 0:
            return (-math.inf, -self.B / self.A)
        return (-math.inf, math.inf)

    def _jet(self, z):
        A = self.A
        u = A * z + self.B
        return Jet3(1 / u, -A / u ** 2, 2 * A ** 2 / u ** 3, -6 * A ** 3 / u ** 4)

    def grid_bounds(self):
        if self.A > 0 and self.B > 0:
            return (self.B / (10 * self.A), 10 * (1 + self.B) / self.A)
        return super().grid_bounds()


@dataclass(frozen=True)
class Tabulated(FactorFamily):
    """Numerically supplied factor, e.g. an ODE trajectory.

    ``jet_fn(z)`` must return the full jet; ``error_bound`` is the relative
    accuracy the supplier vouches for.
    """

    jet_fn: Callable[[float], Jet3]
    lo: float
    hi: float
    error_bound: float

    @property
    def domain(self):
        return (self.lo, self.hi)

    def _jet(self, z):
        return self.jet_fn(z)

    def grid_bounds(self):
        width = self.hi - self.lo
        return (self.lo + 1e-3 * width, self.hi - 1e-3 * width)


def eval_f_jet(family: FactorFamily, z: float) -> Jet3:
    """Exact ``(f, f', f'', f''')`` of ``family`` at ``z``."""
    return family.jet(z)


def sigma_jet(fjet: Jet3) -> Jet3:
    """Jet of ``sigma = ln f`` from the jet of ``f``."""
    if not fjet.v0 > 0:
        raise DomainError(f"sigma = ln f needs f > 0, got {fjet.v0!r}")
    f, f1, f2, f3 = fjet.as_tuple()
    q = f1 / f
    return Jet3(math.log(f), q, f2 / f - q ** 2, f3 / f - 3 * f1 * f2 / f ** 2 + 2 * q ** 3)


def z_grid(family: FactorFamily, n: int = 64):
    """``n`` sample heights inside ``family``'s grid interval, log spaced when positive."""
    if n < 1:
        raise DomainError("grid needs at least one point")
    lo, hi = family.grid_bounds()
    if lo > 0:
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)
