"""Exact integration on the CR sphere S^{2n+1} ⊂ C^{n+1}.

Coordinates: xi_i = sqrt(s_i) exp(i phi_i) with s on the standard n-simplex.
In these coordinates the surface measure is 2^{-n} ds dphi, so a monomial
z^alpha zbar^beta reduces to a polynomial in s (degree |alpha|) times a
Fourier mode in phi.  Gauss-Legendre on collapsed simplex coordinates and
trapezoid rules in the angles are then exact up to a chosen degree.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

SUPPORTED_N = (1, 2)


def sphere_area(n: int) -> float:
    """|S^{2n+1}| = 2 pi^{n+1} / n!."""
    return 2.0 * math.pi ** (n + 1) / math.factorial(n)


def monomial_integral(alpha, beta, n: int) -> float:
    """Closed-form surface integral of z^alpha zbar^beta over S^{2n+1}."""
    alpha, beta = tuple(alpha), tuple(beta)
    if len(alpha) != n + 1 or len(beta) != n + 1:
        raise ValueError("multi-index length must be n+1")
    if alpha != beta:
        return 0.0
    num = math.factorial(n)
    for a in alpha:
        num *= math.factorial(a)
    return sphere_area(n) * num / math.factorial(n + sum(alpha))


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes on S^{2n+1} with positive weights summing to |S^{2n+1}|."""

    n: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degree: int

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, values: np.ndarray) -> complex | float:
        # fixed summation order -> deterministic
        return np.dot(self.weights, values)

    def rotated(self, U: np.ndarray) -> "QuadratureGrid":
        """Grid with nodes U xi; integrals of f are unchanged in exact arithmetic."""
        return QuadratureGrid(self.n, self.nodes @ U.T, self.weights, self.degree)


def _gauss01(m: int):
    x, w = np.polynomial.legendre.leggauss(max(m, 1))
    return 0.5 * (x + 1.0), 0.5 * w


def _simplex_rule(n: int, s_points: list[int]):
    """Collapsed-coordinate rule on {s >= 0, sum s = 1} in R^{n+1}.

    Returns (s, w) with s of shape (N, n+1) and weights integrating against
    ds_1...ds_n.  s_points[k] is the number of Gauss points in the k-th
    collapsed coordinate.
    """
    if n == 0:
        return np.ones((1, 1)), np.ones(1)
    x, wx = _gauss01(s_points[0])
    s_rest, w_rest = _simplex_rule(n - 1, s_points[1:])
    # s_1 = x, (s_2..s_{n+1}) = (1 - x) * s_rest, jacobian (1 - x)^{n-1}
    S = np.empty((len(x) * len(w_rest), n + 1))
    W = np.empty(len(x) * len(w_rest))
    k = 0
    for xi, wi in zip(x, wx):
        block = slice(k, k + len(w_rest))
        S[block, 0] = xi
        S[block, 1:] = (1.0 - xi) * s_rest
        W[block] = wi * (1.0 - xi) ** (n - 1) * w_rest
        k += len(w_rest)
    return S, W


def product_grid(n: int, s_points: list[int], phi_points: list[int], degree: int = -1) -> QuadratureGrid:
    """Anisotropic product rule: Gauss in collapsed simplex coordinates, trapezoid in angles."""
    if len(s_points) != n or len(phi_points) != n + 1:
        raise ValueError("need n simplex resolutions and n+1 angular resolutions")
    S, Ws = _simplex_rule(n, list(s_points))
    phis = [2.0 * np.pi * np.arange(m) / m for m in phi_points]
    mesh = np.meshgrid(*phis, indexing="ij")
    P = np.stack([m.ravel() for m in mesh], axis=-1)
    wphi = np.prod([2.0 * np.pi / m for m in phi_points])
    amp = np.sqrt(np.clip(S, 0.0, None))
    nodes = amp[:, None, :] * np.exp(1j * P[None, :, :])
    nodes = nodes.reshape(-1, n + 1)
    weights = (np.repeat(Ws, len(P)) * wphi) / 2.0 ** n
    return QuadratureGrid(n, nodes, weights, degree)


def grid_resolution(n: int, degree: int):
    """Point counts giving exactness for all monomials of total degree <= degree."""
    half = degree // 2
    # collapsed coordinate k carries an extra (1-x)^{n-1-k} jacobian factor
    s_points = [(half + (n - 1 - k)) // 2 + 1 for k in range(n)]
    phi_points = [degree + 1] * (n + 1)
    return s_points, phi_points


@functools.lru_cache(maxsize=16)
def quadrature_grid(n: int, degree: int) -> QuadratureGrid:
    """Product rule on S^{2n+1} exact for z^alpha zbar^beta with |alpha|+|beta| <= degree.

    Grids are memoized so that basis matrices cached per grid are reused.
    """
    if n not in SUPPORTED_N:
        raise ValueError(f"quadrature grids are provided for n in {SUPPORTED_N}, got n={n}")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    s_points, phi_points = grid_resolution(n, degree)
    return product_grid(n, s_points, phi_points, degree)


def unitary_with_first_column(v: np.ndarray) -> np.ndarray:
    """A unitary matrix U with U e_1 = v / |v| (deterministic)."""
    v = np.asarray(v, dtype=complex)
    d = len(v)
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.eye(d, dtype=complex)
    v = v / nv
    M = np.eye(d, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    cols = [v] + [M[:, i] for i in range(d) if i != k]
    Q, R = np.linalg.qr(np.stack(cols, axis=1))
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]
    return Q


def peak_resolution(rho: float, tol: float = 1e-15) -> int:
    """Trapezoid/Gauss points needed to resolve |1 - rho w|^{-a} near w = 1."""
    if rho <= 0:
        return 4
    return int(math.ceil(math.log(tol) / math.log(rho))) + 8


def aligned_grid(n: int, eta: np.ndarray, degree: int, peak_points: int | None = None) -> QuadratureGrid:
    """Grid refined around the direction of eta.

    The first simplex and angular coordinates (those of xi_1) get
    `peak_points` nodes; the rest are exact to `degree`.  Nodes are then
    rotated so that e_1 maps to eta/|eta|.
    """
    if n not in SUPPORTED_N:
        raise ValueError(f"aligned grids are provided for n in {SUPPORTED_N}, got n={n}")
    eta = np.asarray(eta, dtype=complex)
    rho = float(np.linalg.norm(eta))
    if peak_points is None:
        peak_points = peak_resolution(rho)
    s_points, phi_points = grid_resolution(n, degree)
    s_points = [max(s_points[0], peak_points)] + s_points[1:]
    phi_points = [max(phi_points[0], 2 * peak_points)] + phi_points[1:]
    grid = product_grid(n, s_points, phi_points, degree)
    return grid.rotated(unitary_with_first_column(eta)) if rho > 0 else grid


def random_sphere_points(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(count, n + 1)) + 1j * rng.normal(size=(count, n + 1))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]
