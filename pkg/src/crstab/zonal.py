"""Projections of zonal kernels |1 - conj(eta).xi|^{-a} onto bispherical harmonics.

For a function of the form G(<xi, eta_hat>) the projection onto H_{j,k} is a
multiple gamma_{j,k} of the zonal harmonic with pole eta_hat, so

    <g_eta, Y_i> = gamma_{j,k}(|eta|) * conj(Y_i(eta_hat)).

gamma_{j,k} is computed from a power series in rho = |eta|: expand
(1 - rho w)^{-a/2} (1 - rho wbar)^{-a/2} with w = xi_1, and integrate against
the zonal harmonic, which restricted to the sphere reads xi_1^m P(|xi_1|^2).
The pushforward of surface measure under xi -> xi_1 is
|S^{2n-1}| (1 - |w|^2)^{n-1} dA(w) on the unit disk.
"""
from __future__ import annotations

import math
from typing import Dict, Tuple

import numpy as np
from scipy.special import gammaln

from .harmonics import HarmonicBasis
from .quadrature import sphere_area, unitary_with_first_column

SERIES_TOL = 1e-18


def _sphere_area_real(dim: int) -> float:
    """Area of the unit sphere S^{dim-1} in R^dim."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def _zonal_profile(basis: HarmonicBasis, j: int, k: int) -> np.ndarray:
    """Coefficients of P with Z_{e1}(xi) = xi_1^m P(|xi_1|^2) (m = j - k >= 0; conjugate if m < 0)."""
    n = basis.n
    deg = min(j, k)
    m = abs(j - k)
    npts = 2 * deg + 4
    x = 0.5 * (1.0 + np.cos(np.pi * (np.arange(npts) + 0.5) / npts))
    x = 0.25 + 0.75 * x
    pts = np.zeros((npts, n + 1), dtype=complex)
    pts[:, 0] = np.sqrt(x)
    pts[:, 1] = np.sqrt(1.0 - x)
    e1 = np.zeros((1, n + 1), dtype=complex)
    e1[0, 0] = 1.0
    sl = basis.block_slice(j, k)
    Y = basis.evaluate(pts)[:, sl]
    Ye = basis.evaluate(e1)[0, sl]
    Z = (Y @ np.conj(Ye)).real  # real by symmetry on this slice
    vals = Z / np.sqrt(x) ** m
    V = np.vander(x, deg + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return coef


class ZonalProjector:
    """gamma_{j,k}(rho) for the kernel |1 - rho xi_1|^{-a} and all bidegrees of a basis."""

    def __init__(self, basis: HarmonicBasis, a: float):
        self.basis = basis
        self.a = float(a)
        self.n = basis.n
        self.profiles: Dict[Tuple[int, int], np.ndarray] = {
            jk: _zonal_profile(basis, *jk) for jk in basis.order
        }
        self._nq = 0
        self._weights = None
        self._ensure_terms(64)
        # per-basis-element bidegree index and the offsets m
        self._elem_block = np.array([basis.order.index((j, k)) for j, k, _ in basis.labels])

    def _ensure_terms(self, nq: int) -> None:
        if nq <= self._nq:
            return
        n, a = self.n, self.a
        qs = np.arange(nq)
        half = a / 2.0

        def logA(p):
            return gammaln(half + p) - gammaln(half) - gammaln(p + 1.0)

        pref = math.pi * _sphere_area_real(2 * n) if n >= 1 else 0.0
        area = sphere_area(n)
        W = np.zeros((len(self.basis.order), nq))
        for b, (j, k) in enumerate(self.basis.order):
            m = abs(j - k)
            dim = self.basis.blocks[(j, k)].dim
            P = self.profiles[(j, k)]
            s = qs + m  # power of |w|^2 from the series
            inner = np.zeros(nq)
            for ell, p in enumerate(P):
                # Beta(s + ell + 1, n)
                inner += p * np.exp(gammaln(s + ell + 1.0) + gammaln(n) - gammaln(s + ell + 1.0 + n))
            W[b] = pref * np.exp(logA(qs + m) + logA(qs)) * inner / (dim / area)
        self._weights = W
        self._nq = nq

    def gammas(self, rho: float) -> np.ndarray:
        """gamma_{j,k}(rho) for every bidegree in basis.order."""
        rho = float(rho)
        if rho < 0 or rho >= 1:
            raise ValueError("rho must lie in [0, 1)")
        if rho == 0.0:
            nq = 1
        else:
            nq = int(math.ceil(math.log(SERIES_TOL) / (2.0 * math.log(rho)))) + 2
        self._ensure_terms(nq)
        m = np.array([abs(j - k) for j, k in self.basis.order])
        with np.errstate(divide="ignore"):
            lr = math.log(rho) if rho > 0 else -np.inf
        powers = np.exp((2.0 * np.arange(nq)[None, :] + m[:, None]) * lr) if rho > 0 else (
            (np.arange(nq)[None, :] == 0) & (m[:, None] == 0)
        ).astype(float)
        return np.sum(self._weights[:, :nq] * powers, axis=1)

    def coefficients(self, eta: np.ndarray) -> np.ndarray:
        """<g_eta, Y_i> (surface measure) for g_eta = |1 - conj(eta).xi|^{-a}."""
        eta = np.asarray(eta, dtype=complex)
        rho = float(np.linalg.norm(eta))
        g = self.gammas(rho)[self._elem_block]
        if rho == 0.0:
            e = np.zeros(self.n + 1, dtype=complex)
            e[0] = 1.0
        else:
            e = eta / rho
        Y = self.basis.evaluate(e[None, :])[0]
        return g * np.conj(Y)


def hyp_mean(n: int, a: float, rho: float) -> float:
    """Probability-measure mean of |1 - rho xi_1|^{-a}: 2F1(a/2, a/2; n+1; rho^2)."""
    from scipy.special import hyp2f1

    return float(hyp2f1(a / 2.0, a / 2.0, n + 1.0, rho * rho))


def rotation_to(eta: np.ndarray) -> np.ndarray:
    return unitary_with_first_column(eta)
