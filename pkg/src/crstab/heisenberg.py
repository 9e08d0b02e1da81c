"""Heisenberg group arithmetic and the Cayley transform onto the CR sphere."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class CRDimension:
    """Derived exponents for H^n and S^{2n+1}."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def Q(self) -> int:
        return 2 * self.n + 2

    @property
    def q(self) -> float:
        return 2.0 * self.Q / (self.Q - 2)

    @property
    def q_exact(self) -> Fraction:
        return Fraction(2 * self.Q, self.Q - 2)

    @property
    def theta(self) -> float:
        return 4.0 / (self.Q - 2)

    @property
    def lambda00(self) -> float:
        return self.n ** 2 / 4.0

    @property
    def sobolev_exponent(self) -> float:
        """(Q-2)/2, the power in c|1 - eta.xi|^{-(Q-2)/2}."""
        return (self.Q - 2) / 2.0

    @property
    def hls_exponent(self) -> float:
        return (self.Q + 2) / 2.0


@dataclass(frozen=True)
class HPoint:
    z: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=complex)))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return len(self.z)

    def inverse(self) -> "HPoint":
        return HPoint(-self.z, -self.t)

    @classmethod
    def identity(cls, n: int) -> "HPoint":
        return cls(np.zeros(n, dtype=complex), 0.0)


def group_compose(u: HPoint, v: HPoint) -> HPoint:
    """(z, t)(z', t') = (z + z', t + t' + 2 Im z.conj(z'))."""
    if u.n != v.n:
        raise ValueError(f"dimension mismatch: {u.n} vs {v.n}")
    return HPoint(u.z + v.z, u.t + v.t + 2.0 * np.imag(np.dot(u.z, np.conj(v.z))))


def homogeneous_norm(u: HPoint) -> float:
    r2 = float(np.sum(np.abs(u.z) ** 2))
    return (r2 * r2 + u.t * u.t) ** 0.25


def dilate(delta: float, u: HPoint) -> HPoint:
    if not delta > 0:
        raise ValueError("dilation factor must be positive")
    return HPoint(delta * u.z, delta * delta * u.t)


# -- Cayley transform ----------------------------------------------------
# Array versions act on z of shape (..., n) and t of shape (...).

def cayley_arrays(z: np.ndarray, t: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    den = 1.0 + r2 - 1j * t
    xi = np.empty(z.shape[:-1] + (z.shape[-1] + 1,), dtype=complex)
    xi[..., :-1] = 2.0 * z / den[..., None]
    xi[..., -1] = (1.0 - r2 + 1j * t) / den
    return xi


def cayley_inv_arrays(xi: np.ndarray):
    xi = np.asarray(xi, dtype=complex)
    last = xi[..., -1]
    opl = 1.0 + last
    if np.any(np.abs(opl) < 1e-300):
        raise ValueError("the south pole (xi_{n+1} = -1) has no Heisenberg preimage")
    z = xi[..., :-1] / opl[..., None]
    # (1 - xi_{n+1}) / (1 + xi_{n+1}) = |z|^2 - i t
    t = -np.imag((1.0 - last) / opl)
    return z, t


def jacobian_heisenberg_side(z: np.ndarray, t: np.ndarray, Q: int) -> np.ndarray:
    r2 = np.sum(np.abs(np.asarray(z)) ** 2, axis=-1)
    return 2.0 ** (Q - 1) * ((1.0 + r2) ** 2 + np.asarray(t) ** 2) ** (-Q / 2.0)


def jacobian_sphere_side(xi: np.ndarray, Q: int) -> np.ndarray:
    return 0.5 * np.abs(1.0 + np.asarray(xi)[..., -1]) ** Q


def cayley(u: HPoint) -> np.ndarray:
    return cayley_arrays(u.z, np.asarray(u.t))


def cayley_inv(xi: np.ndarray) -> HPoint:
    xi = np.asarray(xi, dtype=complex)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise ValueError("point is not on the unit sphere")
    z, t = cayley_inv_arrays(xi)
    return HPoint(z, float(t))


def cayley_jacobian(u: HPoint) -> float:
    Q = 2 * u.n + 2
    return float(jacobian_heisenberg_side(u.z, u.t, Q))


def extremal_profile(z: np.ndarray, t: np.ndarray, power: float) -> np.ndarray:
    """((1+|z|^2)^2 + t^2)^{-power}."""
    r2 = np.sum(np.abs(np.asarray(z)) ** 2, axis=-1)
    return ((1.0 + r2) ** 2 + np.asarray(t) ** 2) ** (-power)


def transfer_to_heisenberg(u: Callable[[np.ndarray], np.ndarray], n: int, weight_exponent) -> Callable:
    """F(z, t) = |J_C|^w u(C(z, t)) for w in {(Q-2)/(2Q), (Q+2)/(2Q)}.

    The returned callable takes arrays z (..., n) and t (...).
    """
    Q = 2 * n + 2
    w = Fraction(weight_exponent).limit_denominator(10 ** 6)
    allowed = {Fraction(Q - 2, 2 * Q), Fraction(Q + 2, 2 * Q)}
    if w not in allowed:
        raise ValueError(f"weight exponent must be one of {sorted(allowed)}, got {weight_exponent}")
    wf = float(w)

    def F(z, t):
        z = np.asarray(z, dtype=complex)
        if z.ndim == 1 and z.shape[0] == n and np.ndim(t) == 0:
            z = z[None, :]
            t = np.atleast_1d(t)
            return (jacobian_heisenberg_side(z, t, Q) ** wf * np.real(u(cayley_arrays(z, t))))[0]
        return jacobian_heisenberg_side(z, t, Q) ** wf * np.real(u(cayley_arrays(z, t)))

    F.weight_exponent = w
    F.sphere_function = u
    return F


def heisenberg_lp_norm(F: Callable, n: int, p: float, grid) -> float:
    """||F||_{L^p(H^n)} computed on the sphere side.

    Pulls the integral back through the Cayley transform:
    int_H |F|^p du = int_S |F(C^{-1} xi)|^p / |J_C(C^{-1} xi)| dxi.
    Nodes at the south pole are skipped (a measure-zero set).
    """
    Q = 2 * n + 2
    xi = grid.nodes
    keep = np.abs(1.0 + xi[:, -1]) > 1e-12
    z, t = cayley_inv_arrays(xi[keep])
    vals = np.abs(F(z, t)) ** p / jacobian_heisenberg_side(z, t, Q)
    return float(np.dot(grid.weights[keep], vals)) ** (1.0 / p)


def heisenberg_lp_norm_direct(F: Callable, n: int, p: float, radial_points: int = 200, t_points: int = 200) -> float:
    """Independent oracle: integrate |F|^p directly on H^n for radial-in-z data.

    Only valid for functions invariant under rotations of z (e.g. pullbacks of
    zonal sphere functions).  Substitutes |z| = tan(a), t = tan(b) to map the
    half-lines onto finite intervals and uses Gauss-Legendre in both.
    """
    xa, wa = np.polynomial.legendre.leggauss(radial_points)
    xb, wb = np.polynomial.legendre.leggauss(t_points)
    a = 0.25 * np.pi * (xa + 1.0)
    wa = 0.25 * np.pi * wa
    b = 0.5 * np.pi * xb
    wb = 0.5 * np.pi * wb
    R = np.tan(a)
    T = np.tan(b)
    RR, TT = np.meshgrid(R, T, indexing="ij")
    z = np.zeros(RR.shape + (n,), dtype=complex)
    z[..., 0] = RR
    vals = np.abs(F(z, TT)) ** p
    # volume of the unit sphere in C^n = R^{2n}
    s2n1 = 2.0 * math.pi ** n / math.factorial(n - 1)
    jac = s2n1 * RR ** (2 * n - 1) / np.cos(a)[:, None] ** 2 / np.cos(b)[None, :] ** 2
    return float(np.einsum("i,j,ij->", wa, wb, vals * jac)) ** (1.0 / p)
