"""Change of basis: translated monomials and the minimal polynomial.

Pointwise products of discrete monomials are not holomorphic, so the
binomial theorem for zeta = a (Z - b) picks up universal integer
corrections organised by Young diagrams. A diagram stands for the
pointwise product of the monomials given by its column heights; its
coefficient depends only on the partition, not on the map.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .calculus import monomial
from .errors import DependenceNotFoundError, NumericalError, ValidationError
from .holomorphy import VertexFunction, epsilon
from .lattice import CriticalMap


def partitions(n: int, max_part: int | None = None):
    """Partitions of n as weakly decreasing tuples, reverse lexicographic."""
    if n < 0:
        raise ValidationError("cannot partition a negative integer")
    if n == 0:
        yield ()
        return
    if max_part is None or max_part > n:
        max_part = n
    for first in range(max_part, 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


@dataclass(frozen=True)
class YoungDiagram:
    """Partition stored as weakly decreasing column heights.

    The columns are the degrees of the monomials multiplied pointwise, so
    (3, 1) stands for Z^{:3:} * Z^{:1:}. The displayed row shape is the
    conjugate partition.
    """

    parts: tuple

    def __post_init__(self):
        p = tuple(int(x) for x in self.parts)
        if any(x < 1 for x in p) or any(p[i] < p[i + 1] for i in range(len(p) - 1)):
            raise ValidationError(f"parts must be weakly decreasing positives, got {p}")
        object.__setattr__(self, "parts", p)

    @property
    def degree(self) -> int:
        return sum(self.parts)

    @property
    def columns(self) -> int:
        return len(self.parts)

    def conjugate(self) -> tuple:
        if not self.parts:
            return ()
        return tuple(
            sum(1 for h in self.parts if h >= j) for j in range(1, self.parts[0] + 1)
        )

    def evaluate(self, cmap: CriticalMap, b: int) -> complex:
        out = 1.0 + 0j
        for h in self.parts:
            out *= monomial(cmap, h)(b)
        return out


def young_coefficient(diagram) -> int:
    """The universal integer coefficient of a diagram,

        (-1)^{k+l} * k! / prod(column_height!) * l! / prod(multiplicity!),

    with k the total degree and l the number of columns. Exact integer.
    """
    parts = diagram.parts if isinstance(diagram, YoungDiagram) else tuple(diagram)
    k = sum(parts)
    l = len(parts)
    t1 = math.factorial(k)
    for h in parts:
        t1 //= math.factorial(h)
    t2 = math.factorial(l)
    for m in Counter(parts).values():
        t2 //= math.factorial(m)
    return (-1) ** (k + l) * t1 * t2


@dataclass
class BPolynomial:
    """Degree-k basis correction as {partition: integer coefficient}."""

    degree: int
    terms: dict

    def coefficient_sum(self) -> int:
        return sum(self.terms.values())

    def evaluate(self, cmap: CriticalMap, b: int) -> complex:
        total = 0j
        for parts, c in sorted(self.terms.items()):
            y = 1.0 + 0j
            for h in parts:
                y *= monomial(cmap, h)(b)
            total += c * y
        return complex(total)


def b_polynomial(k: int) -> BPolynomial:
    """Direct route: one closed-form coefficient per partition of k."""
    k = int(k)
    if k < 0:
        raise ValidationError("degree must be nonnegative")
    return BPolynomial(k, {p: young_coefficient(p) for p in partitions(k)})


def b_polynomial_recursive(k: int) -> BPolynomial:
    """Recursive route: B^0 = 1 and

        B^m = sum_{j<m} binom(m, j) (-1)^{m+j+1} Z^{:m-j:} B^j,

    multiplying a diagram by Z^{:m-j:} adds a column of height m - j.
    """
    k = int(k)
    if k < 0:
        raise ValidationError("degree must be nonnegative")
    levels = [{(): 1}]
    for m in range(1, k + 1):
        terms: dict = {}
        for j in range(m):
            cf = math.comb(m, j) * (-1) ** (m + j + 1)
            for parts, c in levels[j].items():
                key = tuple(sorted(parts + (m - j,), reverse=True))
                terms[key] = terms.get(key, 0) + cf * c
        levels.append(terms)
    return BPolynomial(k, levels[k])


def evaluate_b(cmap: CriticalMap, k: int, b: int) -> complex:
    """B^k at vertex b, via the direct coefficients."""
    return b_polynomial(k).evaluate(cmap, b)


def translate_monomial(cmap: CriticalMap, k: int, a, b: int) -> VertexFunction:
    """Monomial of the rebased map zeta = a (Z - Z(b)), expressed on cmap:

        zeta^{:k:} = a^k sum_j binom(k, j) (-1)^j Z^{:k-j:} B^j(b).
    """
    k = int(k)
    if k < 0:
        raise ValidationError("degree must be nonnegative")
    a = complex(a)
    b = int(b)
    if not 0 <= b < cmap.vertex_count:
        raise ValidationError(f"base vertex {b} out of range")
    total = np.zeros(cmap.vertex_count, dtype=np.complex128)
    for j in range(k + 1):
        bj = evaluate_b(cmap, j, b)
        total += math.comb(k, j) * (-1) ** j * bj * monomial(cmap, k - j).values
    return VertexFunction(cmap, a**k * total)


# -- minimal polynomial ----------------------------------------------------------


@dataclass
class MinimalPolynomial:
    """Smallest vanishing combination P = sum_{k=1}^n a_k Z^{:k:} with a_1 = 1.

    residual is sup |P| over the largest term's sup; the defects measure the
    coefficient symmetry a_k ~ ((n+1-k)!/(n! k!)) (conj a_{n+1-k} / conj a_n)
    (4/delta^2)^{k-1} and the modulus law |a_n| = (4/delta^2)^{(n-1)/2} / n!,
    both relative. normalization_residual is sup |sum k a_k Z^{:k-1:} - eps|,
    which vanishes exactly when a_1 = 1.
    """

    degree: int
    coefficients: np.ndarray
    residual: float
    symmetry_defect: float
    modulus_defect: float
    normalization_residual: float
    sv_ratio: float

    def predicted_coefficients(self, delta: float) -> np.ndarray:
        n = self.degree
        a = self.coefficients
        out = np.empty_like(a)
        for k in range(1, n + 1):
            out[k - 1] = (
                math.factorial(n + 1 - k)
                / (math.factorial(n) * math.factorial(k))
                * (np.conj(a[n - k]) / np.conj(a[n - 1]))
                * (4.0 / delta**2) ** (k - 1)
            )
        return out


def minimal_polynomial(
    cmap: CriticalMap, max_degree: int | None = None, sv_ratio: float = 1e-8
) -> MinimalPolynomial:
    """Find the smallest n with Z^{:1:}..Z^{:n:} linearly dependent.

    The dependence is detected when the smallest singular value of the
    value matrix drops below sv_ratio times the largest; its right null
    vector, scaled to a_1 = 1, is the minimal polynomial.
    """
    if max_degree is None:
        max_degree = min(cmap.vertex_count, 40)
    max_degree = int(max_degree)
    if max_degree < 1:
        raise ValidationError("max_degree must be at least 1")
    best = float("inf")
    for n in range(1, max_degree + 1):
        cols = np.column_stack([monomial(cmap, k).values for k in range(1, n + 1)])
        u, s, vh = np.linalg.svd(cols, full_matrices=False)
        if s[0] == 0.0:
            continue
        ratio = s[-1] / s[0]
        best = min(best, ratio)
        if ratio <= sv_ratio:
            null = np.conj(vh[-1])
            if abs(null[0]) < 1e-12 * np.abs(null).max():
                raise NumericalError(
                    f"null vector has a_1 ~ 0 (|{null[0]:.3e}|), "
                    "cannot normalize the minimal polynomial to a_1 = 1"
                )
            a = null / null[0]
            p = cols @ a
            term_sup = max(
                abs(a[k - 1]) * np.abs(cols[:, k - 1]).max() for k in range(1, n + 1)
            )
            residual = float(np.abs(p).max() / term_sup)

            pred = MinimalPolynomial(
                n, a, 0.0, 0.0, 0.0, 0.0, float(ratio)
            ).predicted_coefficients(cmap.delta)
            symmetry = float(np.abs(a - pred).max() / np.abs(a).max())
            mod_pred = (4.0 / cmap.delta**2) ** ((n - 1) / 2.0) / math.factorial(n)
            modulus = float(abs(abs(a[-1]) - mod_pred) / mod_pred)

            g = np.zeros(cmap.vertex_count, dtype=np.complex128)
            for k in range(1, n + 1):
                g += k * a[k - 1] * monomial(cmap, k - 1).values
            norm_res = float(np.abs(g - epsilon(cmap).values).max())
            return MinimalPolynomial(
                n, a, residual, symmetry, modulus, norm_res, float(ratio)
            )
    raise DependenceNotFoundError(max_degree, best)
