"""Sparse polynomials in (z, z̄) over C^{n+1}.

A term z^alpha zbar^beta is keyed by the pair of exponent tuples (alpha, beta).
Differentiation treats z and z̄ as independent variables (Wirtinger calculus),
which is what the CR vector fields T_j and T̄_j need.
"""
from __future__ import annotations

from typing import Dict, Iterable, Tuple

import numpy as np

Exponent = Tuple[int, ...]
Key = Tuple[Exponent, Exponent]


class ComplexPolynomial:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Dict[Key, complex] | None = None):
        self.nvars = nvars
        self.terms: Dict[Key, complex] = {}
        if terms:
            for key, c in terms.items():
                self._add(key, c)

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c: complex = 1.0) -> "ComplexPolynomial":
        zero = (0,) * nvars
        return cls(nvars, {(zero, zero): complex(c)})

    @classmethod
    def monomial(cls, alpha: Exponent, beta: Exponent, c: complex = 1.0) -> "ComplexPolynomial":
        return cls(len(alpha), {(tuple(alpha), tuple(beta)): complex(c)})

    @classmethod
    def z(cls, nvars: int, j: int) -> "ComplexPolynomial":
        """The coordinate function zeta_j (0-based index)."""
        alpha = tuple(1 if i == j else 0 for i in range(nvars))
        return cls.monomial(alpha, (0,) * nvars)

    @classmethod
    def zbar(cls, nvars: int, j: int) -> "ComplexPolynomial":
        beta = tuple(1 if i == j else 0 for i in range(nvars))
        return cls.monomial((0,) * nvars, beta)

    @classmethod
    def norm_squared(cls, nvars: int) -> "ComplexPolynomial":
        """|z|^2 = sum_i z_i zbar_i."""
        out = cls(nvars)
        for i in range(nvars):
            e = tuple(1 if k == i else 0 for k in range(nvars))
            out._add((e, e), 1.0)
        return out

    # -- internals ----------------------------------------------------
    def _add(self, key: Key, c: complex) -> None:
        if c == 0:
            return
        v = self.terms.get(key, 0.0) + c
        if v == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = v

    def copy(self) -> "ComplexPolynomial":
        out = ComplexPolynomial(self.nvars)
        out.terms = dict(self.terms)
        return out

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ComplexPolynomial):
            other = ComplexPolynomial.constant(self.nvars, other)
        out = self.copy()
        for k, c in other.terms.items():
            out._add(k, c)
        return out

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        if not isinstance(other, ComplexPolynomial):
            other = ComplexPolynomial.constant(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ComplexPolynomial):
            out = ComplexPolynomial(self.nvars)
            if other != 0:
                out.terms = {k: c * other for k, c in self.terms.items()}
            return out
        out = ComplexPolynomial(self.nvars)
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (tuple(x + y for x, y in zip(a1, a2)), tuple(x + y for x, y in zip(b1, b2)))
                out._add(key, c1 * c2)
        return out

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __pow__(self, k: int):
        out = ComplexPolynomial.constant(self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def conj(self) -> "ComplexPolynomial":
        """Complex conjugate: swaps the roles of z and z̄."""
        return ComplexPolynomial(self.nvars, {(b, a): np.conj(c) for (a, b), c in self.terms.items()})

    # -- calculus -----------------------------------------------------
    def d_z(self, j: int) -> "ComplexPolynomial":
        out = ComplexPolynomial(self.nvars)
        for (a, b), c in self.terms.items():
            if a[j]:
                a2 = a[:j] + (a[j] - 1,) + a[j + 1:]
                out._add((a2, b), c * a[j])
        return out

    def d_zbar(self, j: int) -> "ComplexPolynomial":
        out = ComplexPolynomial(self.nvars)
        for (a, b), c in self.terms.items():
            if b[j]:
                b2 = b[:j] + (b[j] - 1,) + b[j + 1:]
                out._add((a, b2), c * b[j])
        return out

    def euler_z(self) -> "ComplexPolynomial":
        """sum_k z_k d/dz_k, which multiplies each term by its z-degree."""
        return ComplexPolynomial(self.nvars, {(a, b): c * sum(a) for (a, b), c in self.terms.items()})

    def euler_zbar(self) -> "ComplexPolynomial":
        return ComplexPolynomial(self.nvars, {(a, b): c * sum(b) for (a, b), c in self.terms.items()})

    def laplacian(self) -> "ComplexPolynomial":
        """Euclidean Laplacian up to the factor 4: sum_i d^2/(dz_i dzbar_i)."""
        out = ComplexPolynomial(self.nvars)
        for i in range(self.nvars):
            out = out + self.d_z(i).d_zbar(i)
        return out

    # -- inspection ---------------------------------------------------
    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b in self.terms), default=0)

    def bidegrees(self) -> set:
        return {(sum(a), sum(b)) for a, b in self.terms}

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def chop(self, tol: float = 1e-14) -> "ComplexPolynomial":
        scale = max(self.max_abs_coeff(), 1.0)
        return ComplexPolynomial(self.nvars, {k: c for k, c in self.terms.items() if abs(c) > tol * scale})

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at complex points of shape (..., nvars)."""
        pts = np.asarray(points, dtype=complex)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        if not self.terms:
            return out
        dmax = self.degree()
        powers = [[np.ones(pts.shape[:-1], dtype=complex)] for _ in range(self.nvars)]
        cpowers = [[np.ones(pts.shape[:-1], dtype=complex)] for _ in range(self.nvars)]
        for i in range(self.nvars):
            zi = pts[..., i]
            for _ in range(dmax):
                powers[i].append(powers[i][-1] * zi)
                cpowers[i].append(cpowers[i][-1] * np.conj(zi))
        for (a, b), c in self.terms.items():
            term = np.full(pts.shape[:-1], c, dtype=complex)
            for i in range(self.nvars):
                if a[i]:
                    term = term * powers[i][a[i]]
                if b[i]:
                    term = term * cpowers[i][b[i]]
            out += term
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b), c in sorted(self.terms.items()):
            mono = "".join(f"z{i+1}^{e}" for i, e in enumerate(a) if e) + "".join(
                f"w{i+1}^{e}" for i, e in enumerate(b) if e
            )
            parts.append(f"({c:.6g}){mono or '1'}")
        return " + ".join(parts)


def bihomogeneous_exponents(nvars: int, degree: int) -> list:
    """All exponent tuples of length nvars summing to degree, in lexicographic order."""
    if nvars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in bihomogeneous_exponents(nvars - 1, degree - first):
            out.append((first,) + rest)
    return out


def reduce_sphere(p: ComplexPolynomial) -> ComplexPolynomial:
    """Canonical representative modulo the sphere relation sum |z_i|^2 = 1.

    Every factor z_m zbar_m of the last variable is replaced by
    1 - sum_{i<m} z_i zbar_i until no term contains both z_m and zbar_m.
    Two polynomials agree on the sphere iff their reductions agree.
    """
    m = p.nvars - 1
    out = ComplexPolynomial(p.nvars)
    stack = list(p.terms.items())
    while stack:
        (a, b), c = stack.pop()
        k = min(a[m], b[m])
        if k == 0:
            out._add((a, b), c)
            continue
        a2 = a[:m] + (a[m] - 1,)
        b2 = b[:m] + (b[m] - 1,)
        stack.append(((a2, b2), c))
        for i in range(m):
            a3 = tuple(x + (1 if t == i else 0) for t, x in enumerate(a2))
            b3 = tuple(x + (1 if t == i else 0) for t, x in enumerate(b2))
            stack.append(((a3, b3), -c))
    return out.chop(0.0)


def from_terms(nvars: int, items: Iterable[Tuple[Key, complex]]) -> ComplexPolynomial:
    out = ComplexPolynomial(nvars)
    for k, c in items:
        out._add(k, c)
    return out
