"""Bispherical harmonics on S^{2n+1}, the CR vector fields and the conformal sublaplacian.

Basis elements of H_{j,k} are stored as dense coefficient vectors over the
bihomogeneous monomials z^alpha zbar^beta with |alpha| = j, |beta| = k.
Inner products are exact: the Gram matrix of those monomials on the sphere
comes from the closed-form monomial integral.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.special import gammaln

from .polynomial import ComplexPolynomial, bihomogeneous_exponents, reduce_sphere
from .quadrature import QuadratureGrid, monomial_integral, sphere_area

CACHE_VERSION = 1
CACHE_ENV = "CRSTAB_CACHE_DIR"
MATRIX_ENTRY_LIMIT = 12_000_000  # cached node-by-basis matrices beyond this are streamed


class Measure(str, Enum):
    SURFACE = "surface"
    PROBABILITY = "probability"


@dataclass(frozen=True)
class NormalizationContext:
    """Converts integrals between surface measure and the uniform probability measure."""

    n: int
    measure: Measure = Measure.SURFACE

    @property
    def area(self) -> float:
        return sphere_area(self.n)

    def integral(self, surface_value):
        """Rescale a surface-measure integral into this context's measure."""
        return surface_value if self.measure == Measure.SURFACE else surface_value / self.area


# -- eigenvalues and operators ---------------------------------------------

def eigenvalue(j: int, k: int, n: int) -> float:
    """lambda_{j,k} = ((Q-2)/4 + k)((Q-2)/4 + j)."""
    if j < 0 or k < 0:
        raise ValueError("bidegree must be nonnegative")
    a = n / 2.0
    return (a + k) * (a + j)


def eigenvalue_gamma(j: int, k: int, n: int) -> float:
    """Gamma-quotient form of the same eigenvalue."""
    Q = 2 * n + 2
    hi, lo = (Q + 2) / 4.0, (Q - 2) / 4.0
    return float(np.exp(gammaln(j + hi) + gammaln(k + hi) - gammaln(j + lo) - gammaln(k + lo)))


def harmonic_dimension(j: int, k: int, n: int) -> int:
    num = (j + k + n) * math.factorial(j + n - 1) * math.factorial(k + n - 1)
    den = math.factorial(n) * math.factorial(n - 1) * math.factorial(j) * math.factorial(k)
    return num // den


def apply_T(p: ComplexPolynomial, j: int, conjugated: bool = False) -> ComplexPolynomial:
    """T_j = d/dz_j - zbar_j sum_k z_k d/dz_k (or its conjugate); j is 1-based."""
    if not 1 <= j <= p.nvars:
        raise ValueError(f"index j must lie in 1..{p.nvars}")
    i = j - 1
    if conjugated:
        return p.d_zbar(i) - ComplexPolynomial.z(p.nvars, i) * p.euler_zbar()
    return p.d_z(i) - ComplexPolynomial.zbar(p.nvars, i) * p.euler_z()


def apply_conformal_sublaplacian(p: ComplexPolynomial) -> ComplexPolynomial:
    """L p = -1/2 sum_j (Tbar_j T_j + T_j Tbar_j) p + (n^2/4) p."""
    n = p.nvars - 1
    acc = ComplexPolynomial(p.nvars)
    for j in range(1, p.nvars + 1):
        acc = acc + apply_T(apply_T(p, j), j, conjugated=True)
        acc = acc + apply_T(apply_T(p, j, conjugated=True), j)
    return acc * -0.5 + p * (n * n / 4.0)


def polynomial_inner(p: ComplexPolynomial, q: ComplexPolynomial, n: int) -> complex:
    """<p, q> = int_S p conj(q) in surface measure, exactly."""
    out = 0.0 + 0.0j
    for (a1, b1), c1 in p.terms.items():
        for (a2, b2), c2 in q.terms.items():
            alpha = tuple(x + y for x, y in zip(a1, b2))
            beta = tuple(x + y for x, y in zip(b1, a2))
            if alpha == beta:
                out += c1 * np.conj(c2) * monomial_integral(alpha, beta, n)
    return out


# -- basis ------------------------------------------------------------------

@dataclass
class HarmonicBlock:
    j: int
    k: int
    keys: List[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    gram: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)  # (num monomials, dim), columns orthonormal

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]


class BasisConstructionError(RuntimeError):
    pass


def _monomial_gram(keys, n: int) -> np.ndarray:
    m = len(keys)
    G = np.zeros((m, m))
    for s, (a1, b1) in enumerate(keys):
        for t, (a2, b2) in enumerate(keys):
            alpha = tuple(x + y for x, y in zip(a1, b2))
            beta = tuple(x + y for x, y in zip(b1, a2))
            if alpha == beta:
                G[s, t] = monomial_integral(alpha, beta, n)
    return G


def _homogenize(block: HarmonicBlock, keys_index: Dict, m: int, nv: int) -> np.ndarray:
    """Coefficients of |z|^{2m} * (elements of a lower block) in the current monomial set."""
    norm_sq = ComplexPolynomial.norm_squared(nv) ** m
    out = np.zeros((len(keys_index), block.dim), dtype=complex)
    for col in range(block.dim):
        for (a, b), c in zip(block.keys, block.coeffs[:, col]):
            if c == 0:
                continue
            for (a2, b2), c2 in norm_sq.terms.items():
                key = (tuple(x + y for x, y in zip(a, a2)), tuple(x + y for x, y in zip(b, b2)))
                out[keys_index[key], col] += c * c2
    return out


def _build_block(n: int, j: int, k: int, lower: List[HarmonicBlock], tol: float) -> HarmonicBlock:
    nv = n + 1
    keys = [(a, b) for a in bihomogeneous_exponents(nv, j) for b in bihomogeneous_exponents(nv, k)]
    index = {key: i for i, key in enumerate(keys)}
    G = _monomial_gram(keys, n)

    def inner(x, y):
        return np.conj(y) @ (G @ x)

    prior = [_homogenize(b, index, min(j, k) - min(b.j, b.k), nv) for b in lower]
    prior = np.concatenate(prior, axis=1) if prior else np.zeros((len(keys), 0), dtype=complex)

    found: List[np.ndarray] = []
    target = harmonic_dimension(j, k, n)
    for i in range(len(keys)):
        v = np.zeros(len(keys), dtype=complex)
        v[i] = 1.0
        start = math.sqrt(G[i, i])
        for _ in range(2):  # twice is enough
            for col in range(prior.shape[1]):
                v = v - inner(v, prior[:, col]) * prior[:, col]
            for u in found:
                v = v - inner(v, u) * u
        nrm = math.sqrt(max(inner(v, v).real, 0.0))
        if nrm > tol * start:
            found.append(v / nrm)
        if len(found) == target:
            break
    if len(found) != target:
        raise BasisConstructionError(
            f"bidegree ({j},{k}): obtained {len(found)} independent harmonics, expected {target}"
        )
    coeffs = np.stack(found, axis=1)
    # mop up any residual non-orthogonality within the block (Loewdin)
    S = np.conj(coeffs.T) @ G @ coeffs
    w, V = np.linalg.eigh(S)
    if w.min() < 1e-8:
        raise BasisConstructionError(f"bidegree ({j},{k}): Gram matrix numerically singular")
    coeffs = coeffs @ (V @ np.diag(w ** -0.5) @ np.conj(V.T))
    coeffs[np.abs(coeffs) < 1e-15 * np.abs(coeffs).max()] = 0.0
    return HarmonicBlock(j, k, keys, G, coeffs)


def bidegrees_upto(D: int) -> List[Tuple[int, int]]:
    """Ordering: total degree, then j ascending."""
    return [(j, d - j) for d in range(D + 1) for j in range(d + 1)]


class HarmonicBasis:
    """Orthonormal (surface measure) bases of H_{j,k} for j + k <= D."""

    def __init__(self, n: int, D: int, blocks: Dict[Tuple[int, int], HarmonicBlock]):
        self.n = n
        self.D = D
        self.blocks = blocks
        self.order = bidegrees_upto(D)
        self.labels: List[Tuple[int, int, int]] = []
        self.offsets: Dict[Tuple[int, int], int] = {}
        for jk in self.order:
            self.offsets[jk] = len(self.labels)
            self.labels.extend((jk[0], jk[1], i) for i in range(blocks[jk].dim))
        self.eigenvalues = np.array([eigenvalue(j, k, n) for j, k, _ in self.labels])
        self._eval_cache: Dict[int, Tuple[QuadratureGrid, np.ndarray]] = {}
        self._deriv_cache: Dict[int, Tuple[QuadratureGrid, np.ndarray]] = {}
        self._conj_map = None

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"HarmonicBasis(n={self.n}, D={self.D}, size={len(self)})"

    def index(self, j: int, k: int, idx: int = 0) -> int:
        if (j, k) not in self.offsets:
            raise KeyError(f"bidegree ({j},{k}) not in basis of degree {self.D}")
        if not 0 <= idx < self.blocks[(j, k)].dim:
            raise KeyError(f"H_{j},{k} has dimension {self.blocks[(j, k)].dim}, index {idx} out of range")
        return self.offsets[(j, k)] + idx

    def block_slice(self, j: int, k: int) -> slice:
        s = self.offsets[(j, k)]
        return slice(s, s + self.blocks[(j, k)].dim)

    def polynomial(self, i: int) -> ComplexPolynomial:
        j, k, idx = self.labels[i]
        b = self.blocks[(j, k)]
        return ComplexPolynomial(self.n + 1, {key: c for key, c in zip(b.keys, b.coeffs[:, idx]) if c != 0})

    def polynomials(self, j: int, k: int) -> List[ComplexPolynomial]:
        return [self.polynomial(i) for i in range(len(self))[self.block_slice(j, k)]]

    # -- evaluation ------------------------------------------------------
    def _dense(self):
        """Exponent arrays of every stored monomial and the (monomials x basis) coefficient matrix."""
        if getattr(self, "_dense_cache", None) is None:
            keys, rows = [], []
            C = []
            for jk in self.order:
                b = self.blocks[jk]
                keys.extend(b.keys)
            C = np.zeros((len(keys), len(self)), dtype=complex)
            r = 0
            for jk in self.order:
                b = self.blocks[jk]
                C[r:r + len(b.keys), self.block_slice(*jk)] = b.coeffs
                r += len(b.keys)
            alpha = np.array([a for a, _ in keys], dtype=int).reshape(len(keys), self.n + 1)
            beta = np.array([bb for _, bb in keys], dtype=int).reshape(len(keys), self.n + 1)
            self._dense_cache = (alpha, beta, C)
        return self._dense_cache

    def _power_tables(self, pts: np.ndarray, top: int):
        P = np.ones((top + 1,) + pts.shape, dtype=complex)
        for e in range(1, top + 1):
            P[e] = P[e - 1] * pts
        return P, np.conj(P)

    def _monomials(self, P, Pc, alpha, beta) -> np.ndarray:
        table = np.ones((P.shape[1], alpha.shape[0]), dtype=complex)
        for i in range(self.n + 1):
            table *= P[alpha[:, i], :, i].T
            table *= Pc[beta[:, i], :, i].T
        return table

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Matrix of basis values, shape (..., len(basis))."""
        pts = np.asarray(points, dtype=complex)
        lead = pts.shape[:-1]
        pts = pts.reshape(-1, self.n + 1)
        alpha, beta, C = self._dense()
        P, Pc = self._power_tables(pts, self.D)
        return (self._monomials(P, Pc, alpha, beta) @ C).reshape(lead + (len(self),))

    def evaluate_derivatives(self, points: np.ndarray) -> np.ndarray:
        """T_j Y_i and Tbar_j Y_i at points, shape (2(n+1), N, len(basis)).

        On monomials: T_j z^a zbar^b = a_j z^{a-e_j} zbar^b - |a| z^a zbar^{b+e_j}
        and Tbar_j z^a zbar^b = b_j z^a zbar^{b-e_j} - |b| z^{a+e_j} zbar^b.
        """
        pts = np.asarray(points, dtype=complex).reshape(-1, self.n + 1)
        alpha, beta, C = self._dense()
        P, Pc = self._power_tables(pts, self.D + 1)
        na = alpha.sum(axis=1)
        nb = beta.sum(axis=1)
        nv = self.n + 1
        out = np.empty((2 * nv, pts.shape[0], len(self)), dtype=complex)
        for j in range(nv):
            e = np.zeros(nv, dtype=int)
            e[j] = 1
            lower = self._monomials(P, Pc, np.maximum(alpha - e, 0), beta) * alpha[:, j]
            upper = self._monomials(P, Pc, alpha, beta + e) * na
            out[j] = (lower - upper) @ C
            lower = self._monomials(P, Pc, alpha, np.maximum(beta - e, 0)) * beta[:, j]
            upper = self._monomials(P, Pc, alpha + e, beta) * nb
            out[nv + j] = (lower - upper) @ C
        return out

    def fits_in_memory(self, grid: QuadratureGrid) -> bool:
        return len(grid) * len(self) <= MATRIX_ENTRY_LIMIT

    def _chunks(self, grid: QuadratureGrid):
        step = max(1, MATRIX_ENTRY_LIMIT // (4 * len(self)))
        for s in range(0, len(grid), step):
            yield slice(s, min(s + step, len(grid)))

    def analysis(self, grid: QuadratureGrid, weighted_values: np.ndarray) -> np.ndarray:
        """sum_nodes conj(Y_i) * weighted_values, chunked for large grids."""
        if self.fits_in_memory(grid):
            return np.conj(self.matrix(grid)).T @ weighted_values
        out = np.zeros(len(self), dtype=complex)
        for sl in self._chunks(grid):
            out += np.conj(self.evaluate(grid.nodes[sl])).T @ weighted_values[sl]
        return out

    def synthesis(self, grid: QuadratureGrid, coeffs: np.ndarray) -> np.ndarray:
        if self.fits_in_memory(grid):
            return self.matrix(grid) @ coeffs
        out = np.empty(len(grid), dtype=complex)
        for sl in self._chunks(grid):
            out[sl] = self.evaluate(grid.nodes[sl]) @ coeffs
        return out

    def matrix(self, grid: QuadratureGrid) -> np.ndarray:
        hit = self._eval_cache.get(id(grid))
        if hit is None or hit[0] is not grid:
            hit = (grid, self.evaluate(grid.nodes))
            self._eval_cache[id(grid)] = hit
        return hit[1]

    def derivative_matrices(self, grid: QuadratureGrid) -> np.ndarray:
        """Values of T_j Y_i and Tbar_j Y_i at nodes: shape (2(n+1), N, len(basis))."""
        hit = self._deriv_cache.get(id(grid))
        if hit is not None and hit[0] is grid:
            return hit[1]
        nv = self.n + 1
        out = np.empty((2 * nv, len(grid), len(self)), dtype=complex)
        for sl in self._chunks(grid):
            out[:, sl, :] = self.evaluate_derivatives(grid.nodes[sl])
        self._deriv_cache[id(grid)] = (grid, out)
        return out

    def conjugation_matrix(self) -> np.ndarray:
        """K with coeffs(conj f) = K @ conj(coeffs(f))."""
        if self._conj_map is not None:
            return self._conj_map
        K = np.zeros((len(self), len(self)), dtype=complex)
        for (j, k), b in self.blocks.items():
            target = self.blocks[(k, j)]
            tindex = {key: i for i, key in enumerate(target.keys)}
            # conj(Y) has coefficients conj(c) on swapped keys
            X = np.zeros((len(target.keys), b.dim), dtype=complex)
            for r, (a, bb) in enumerate(b.keys):
                X[tindex[(bb, a)], :] = np.conj(b.coeffs[r, :])
            coords = np.conj(target.coeffs.T) @ target.gram @ X
            K[self.block_slice(k, j), self.block_slice(j, k)] = coords
        # convention: coeffs(conj f) = K conj(c)
        self._conj_map = K
        return K

    # -- serialization ---------------------------------------------------
    def to_json(self, exactness: int | None = None) -> str:
        payload = {
            "version": CACHE_VERSION,
            "n": self.n,
            "D": self.D,
            "exactness": exactness,
            "blocks": [
                {
                    "j": b.j,
                    "k": b.k,
                    "keys": [[list(a), list(bb)] for a, bb in b.keys],
                    "re": b.coeffs.real.tolist(),
                    "im": b.coeffs.imag.tolist(),
                }
                for b in (self.blocks[jk] for jk in self.order)
            ],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "HarmonicBasis":
        data = json.loads(text)
        if data.get("version") != CACHE_VERSION:
            raise ValueError(f"unsupported basis cache version {data.get('version')}")
        n = data["n"]
        blocks = {}
        for entry in data["blocks"]:
            keys = [(tuple(a), tuple(b)) for a, b in entry["keys"]]
            coeffs = np.array(entry["re"]) + 1j * np.array(entry["im"])
            blocks[(entry["j"], entry["k"])] = HarmonicBlock(
                entry["j"], entry["k"], keys, _monomial_gram(keys, n), coeffs.reshape(len(keys), -1)
            )
        return cls(n, data["D"], blocks)


def build_basis(n: int, D: int, tol: float = 1e-8) -> HarmonicBasis:
    if D < 0:
        raise ValueError("maximal degree D must be nonnegative")
    if n < 1:
        raise ValueError("n must be positive")
    blocks: Dict[Tuple[int, int], HarmonicBlock] = {}
    for j, k in bidegrees_upto(D):
        lower = [blocks[(j - m, k - m)] for m in range(1, min(j, k) + 1)]
        blocks[(j, k)] = _build_block(n, j, k, lower, tol)
    return HarmonicBasis(n, D, blocks)


def cached_basis(n: int, D: int, exactness: int | None = None, cache_dir: str | os.PathLike | None = None) -> HarmonicBasis:
    """build_basis with an optional on-disk JSON cache (directory from CRSTAB_CACHE_DIR)."""
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return build_basis(n, D)
    path = Path(cache_dir) / f"basis_n{n}_D{D}_x{exactness if exactness is not None else 'na'}.json"
    if path.exists():
        try:
            return HarmonicBasis.from_json(path.read_text())
        except (ValueError, KeyError):
            pass
    basis = build_basis(n, D)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(basis.to_json(exactness))
    return basis


def eigen_residual(basis: HarmonicBasis, i: int) -> float:
    """||L Y - lambda Y|| / ||Y|| with L applied symbolically, reduced on the sphere."""
    p = basis.polynomial(i)
    lam = basis.eigenvalues[i]
    diff = reduce_sphere(apply_conformal_sublaplacian(p) - p * lam)
    num = polynomial_inner(diff, diff, basis.n).real
    den = polynomial_inner(p, p, basis.n).real
    return math.sqrt(max(num, 0.0) / den)


# -- fields -----------------------------------------------------------------

class SpectralField:
    """f = sum_i c_i Y_i over a HarmonicBasis (surface-orthonormal Y_i)."""

    def __init__(self, basis: HarmonicBasis, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (len(basis),):
            raise ValueError(f"expected {len(basis)} coefficients, got {coeffs.shape}")
        self.basis = basis
        self.coeffs = coeffs
        self._cache: Dict[int, Tuple[QuadratureGrid, np.ndarray]] = {}

    @classmethod
    def zero(cls, basis):
        return cls(basis, np.zeros(len(basis), dtype=complex))

    @classmethod
    def constant(cls, basis, c: float = 1.0):
        out = cls.zero(basis)
        out.coeffs[0] = c * math.sqrt(sphere_area(basis.n))
        return out

    @property
    def n(self) -> int:
        return self.basis.n

    def copy(self) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs.copy())

    def __add__(self, other):
        if isinstance(other, SpectralField):
            return SpectralField(self.basis, self.coeffs + other.coeffs)
        return self + SpectralField.constant(self.basis, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __mul__(self, scalar):
        return SpectralField(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    # values
    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.basis.evaluate(points) @ self.coeffs

    def values(self, grid: QuadratureGrid) -> np.ndarray:
        hit = self._cache.get(id(grid))
        if hit is None or hit[0] is not grid:
            hit = (grid, self.basis.synthesis(grid, self.coeffs))
            self._cache[id(grid)] = hit
        return hit[1]

    def real_values(self, grid: QuadratureGrid) -> np.ndarray:
        return self.values(grid).real

    def derivative_values(self, grid: QuadratureGrid) -> np.ndarray:
        """Stack (T_1 f, ..., T_{n+1} f, Tbar_1 f, ..., Tbar_{n+1} f) at nodes."""
        return self.basis.derivative_matrices(grid) @ self.coeffs

    # spectral quantities
    def l2_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def energy(self) -> float:
        return float(np.sum(self.basis.eigenvalues * np.abs(self.coeffs) ** 2))

    def apply_L(self) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs * self.basis.eigenvalues)

    def apply_L_inverse(self) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs / self.basis.eigenvalues)

    def block(self, j: int, k: int) -> np.ndarray:
        return self.coeffs[self.basis.block_slice(j, k)]

    def mean(self, measure: Measure = Measure.PROBABILITY) -> complex:
        integral = self.coeffs[0] * math.sqrt(sphere_area(self.n))
        return NormalizationContext(self.n, measure).integral(integral)

    def conj(self) -> "SpectralField":
        return SpectralField(self.basis, self.basis.conjugation_matrix() @ np.conj(self.coeffs))

    def real_part(self) -> "SpectralField":
        return SpectralField(self.basis, 0.5 * (self.coeffs + self.conj().coeffs))

    def realness_defect(self) -> float:
        return float(np.linalg.norm(self.coeffs - self.conj().coeffs))

    def truncated(self, max_degree: int) -> "SpectralField":
        out = self.copy()
        for i, (j, k, _) in enumerate(self.basis.labels):
            if j + k > max_degree:
                out.coeffs[i] = 0.0
        return out

    def without_low_modes(self) -> "SpectralField":
        """Remove H_{0,0}, H_{1,0}, H_{0,1} components."""
        out = self.copy()
        for jk in [(0, 0), (1, 0), (0, 1)]:
            if jk in self.basis.offsets:
                out.coeffs[self.basis.block_slice(*jk)] = 0.0
        return out


def project(f, basis: HarmonicBasis, grid: QuadratureGrid) -> SpectralField:
    """L^2 projection by quadrature; f is a callable on (N, n+1) points or an array of node values."""
    vals = np.asarray(f(grid.nodes) if callable(f) else f)
    coeffs = basis.analysis(grid, grid.weights * vals)
    return SpectralField(basis, coeffs)


def lp_norm(f, p: float, grid: QuadratureGrid, measure: Measure = Measure.SURFACE) -> float:
    if p < 1:
        raise ValueError("p must be at least 1")
    if isinstance(f, SpectralField):
        vals = f.values(grid)
    elif callable(f):
        vals = f(grid.nodes)
    else:
        vals = np.asarray(f)
    integral = float(np.dot(grid.weights, np.abs(vals) ** p))
    return NormalizationContext(grid.n, measure).integral(integral) ** (1.0 / p)


def real_harmonic(basis: HarmonicBasis, j: int, k: int, idx: int = 0, measure: Measure = Measure.PROBABILITY) -> SpectralField:
    """Real test field sqrt(2) Re(Y) for Y the idx-th element of H_{j,k}, unit L^2 norm in `measure`.

    Falls back to the imaginary part when Re(Y) vanishes identically.
    """
    e = SpectralField.zero(basis)
    e.coeffs[basis.index(j, k, idx)] = 1.0
    f = e.real_part()
    if f.l2_norm_sq() < 1e-20:
        f = (e * -1j).real_part()
    f = f * (1.0 / math.sqrt(f.l2_norm_sq()))
    if measure == Measure.PROBABILITY:
        f = f * math.sqrt(sphere_area(basis.n))
    return f
