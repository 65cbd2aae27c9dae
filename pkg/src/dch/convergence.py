"""Refinement harness: empirical convergence orders against smooth oracles.

A refining family covers a fixed plane patch at every level with rhombi of
shrinking side: the rectangular kind halves delta per level on a unit
rhombus patch, the chain kind doubles the square count along [0, 1]. Sup
errors against the continuous target are measured on the vertices of the
coarsest level used, which recur identically at every finer level, and a
least-squares line through the last log-log points estimates the order.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .calculus import SeriesDivergenceWarning, exp_product, monomial, primitive
from .errors import ConvergenceDomainError, ValidationError
from .holomorphy import VertexFunction, canonical_pins, solve_boundary
from .lattice import CriticalMap, build_chain, build_rect_lattice

RECT = "rect"
CHAIN = "chain"


@dataclass(frozen=True)
class RefiningFamily:
    """Fixed-domain refinement rule.

    rect: level l is a (2^l base_rows) x (2^l base_cols) patch with
    delta = delta0 / 2^l and half-angle theta, anchored at the origin.
    chain: level l is build_chain(2^l), so delta = 1 / 2^l.
    Lozenge angles must stay above angle_floor at every level.
    """

    kind: str
    levels: tuple
    theta: float = math.pi / 4
    delta0: float = 1.0
    base_rows: int = 1
    base_cols: int = 1
    angle_floor: float = math.pi / 12

    def __post_init__(self):
        if self.kind not in (RECT, CHAIN):
            raise ValidationError(f"kind must be {RECT!r} or {CHAIN!r}, got {self.kind!r}")
        lv = tuple(int(x) for x in self.levels)
        if not lv or any(x < 0 for x in lv) or list(lv) != sorted(set(lv)):
            raise ValidationError("levels must be strictly increasing nonnegative ints")
        object.__setattr__(self, "levels", lv)
        if self.kind == CHAIN and self.delta0 != 1.0:
            raise ValidationError("chain families have delta fixed at 1/n")
        if self.kind == RECT and not 0.0 < self.theta < math.pi / 2:
            raise ValidationError("theta must lie strictly between 0 and pi/2")
        if self.delta0 <= 0.0:
            raise ValidationError("delta0 must be positive")

    def delta_at(self, level: int) -> float:
        return self.delta0 / 2**level


@functools.lru_cache(maxsize=64)
def _build(family: RefiningFamily, level: int) -> CriticalMap:
    if family.kind == CHAIN:
        cmap = build_chain(2**level)
    else:
        cmap = build_rect_lattice(
            family.delta_at(level),
            family.theta,
            family.base_rows * 2**level,
            family.base_cols * 2**level,
        )
    if cmap.eta < family.angle_floor - 1e-12:
        raise ConvergenceDomainError(
            f"lozenge half-angle {cmap.eta:.6f} below floor {family.angle_floor:.6f}"
        )
    return cmap


def refine(family: RefiningFamily, level: int) -> CriticalMap:
    """The level's map. Levels outside the family's range are rejected."""
    level = int(level)
    if level not in family.levels:
        raise ValidationError(f"level {level} not in family levels {family.levels}")
    return _build(family, level)


def sample_ids(family: RefiningFamily, level: int) -> np.ndarray:
    """Ids, at the given level, of the coarsest level's sample vertices.

    For chains the persistent vertices are the ones on the real axis; the
    apex row moves with delta. For rectangles the whole coarse grid recurs.
    """
    l0 = family.levels[0]
    f = 2 ** (level - l0)
    if family.kind == CHAIN:
        return np.arange(2**l0 + 1, dtype=np.int64) * f
    rows_l = family.base_rows * 2**level
    m = np.arange(family.base_cols * 2**l0 + 1, dtype=np.int64) * f
    n = np.arange(family.base_rows * 2**l0 + 1, dtype=np.int64) * f
    return (m[:, None] * (rows_l + 1) + n[None, :]).ravel()


@dataclass
class ConvergenceReport:
    """Per-level sup errors with a fitted order."""

    target: str
    levels: tuple
    deltas: np.ndarray
    sup_errors: np.ndarray
    order: float
    fit_residual: float
    extras: dict = field(default_factory=dict)

    def to_csv_text(self) -> str:
        lines = ["level,delta,sup_error"]
        for lv, d, e in zip(self.levels, self.deltas, self.sup_errors):
            lines.append(f"{lv},{d:.17g},{e:.17g}")
        lines.append(f"# order={self.order:.6g},resid={self.fit_residual:.6g}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        from .lattice import write_text_atomic

        write_text_atomic(path, self.to_csv_text())


def fit_order(deltas, errors, window: int = 4):
    """Least-squares slope of log10(error) vs log10(delta), finest `window`
    levels. Returns (order, rms residual); nан when a window error is 0."""
    d = np.asarray(deltas, dtype=float)[-window:]
    e = np.asarray(errors, dtype=float)[-window:]
    if d.size < 2 or np.any(e <= 0.0):
        return float("nan"), float("nan")
    ld, le = np.log10(d), np.log10(e)
    coeff = np.polyfit(ld, le, 1)
    resid = le - np.polyval(coeff, ld)
    return float(coeff[0]), float(np.sqrt(np.mean(resid**2)))


def _report(family, target, levels, errors, extras=None):
    deltas = np.array([family.delta_at(lv) for lv in levels])
    errs = np.asarray(errors, dtype=float)
    order, resid = fit_order(deltas, errs)
    return ConvergenceReport(target, tuple(levels), deltas, errs, order, resid, extras or {})


def _levels(family, levels):
    if levels is None:
        return family.levels
    lv = tuple(int(x) for x in levels)
    for x in lv:
        if x not in family.levels:
            raise ValidationError(f"level {x} not in family levels {family.levels}")
    return lv


def monomial_convergence(family: RefiningFamily, k: int, levels=None) -> ConvergenceReport:
    """Sup error of Z^{:k:} against (z - O)^k on the sample vertices.

    Also estimates the scaling constant lambda_k as the largest observed
    error / (|x|^{k-2} delta^2) over samples away from the origin.
    """
    k = int(k)
    if not 0 <= k <= 8:
        raise ValidationError("monomial convergence is meaningful for k <= 8")
    levels = _levels(family, levels)
    errors = []
    lam_bound = 0.0
    for lv in levels:
        cmap = refine(family, lv)
        ids = sample_ids(family, lv)
        zk = monomial(cmap, k).values[ids]
        x = cmap.positions[ids] - cmap.positions[cmap.origin]
        err = np.abs(zk - x**k)
        errors.append(float(err.max()) if err.size else 0.0)
        away = np.abs(x) > 0
        if k >= 2 and np.any(away):
            denom = np.abs(x[away]) ** (k - 2) * cmap.delta**2
            lam_bound = max(lam_bound, float((err[away] / denom).max()))
    return _report(
        family, f"monomial k={k}", levels, errors, {"empirical_lambda_k": lam_bound}
    )


def _series_tail_check(coeffs, radius):
    # a short list is an exact polynomial; sustained growth of |a_j| R^j at
    # the end of a long one means the series does not converge on the patch
    t = [abs(c) * radius**j for j, c in enumerate(coeffs)]
    if len(t) >= 8 and all(
        t[j] > t[j - 1] * (1 + 1e-12) for j in range(len(t) - 4, len(t))
    ):
        raise ConvergenceDomainError(
            f"series terms |a_j| R^j grow at the tail ({t[-1]:.3e} at j = "
            f"{len(t) - 1}) on radius {radius:.3g}: radius of convergence too small"
        )


def _horner(coeffs, z):
    out = np.zeros_like(z)
    for c in reversed(list(coeffs)):
        out = out * z + c
    return out


def primitive_convergence(family: RefiningFamily, coefficients, levels=None) -> ConvergenceReport:
    """Discrete primitive of a sampled series versus the continuous one.

    coefficients is the coefficient list of f(z) = sum a_j z^j around 0, valid on
    the whole patch. The restriction of f to the vertices is projected to
    its discretely holomorphic part (boundary values kept, interior
    re-solved) before integrating; the raw-restriction error is kept in
    extras["raw_sup_errors"] for comparison.
    """
    coeffs = [complex(c) for c in coefficients]
    if not coeffs:
        raise ValidationError("empty coefficient list")
    levels = _levels(family, levels)
    radius = float(np.abs(refine(family, levels[0]).positions).max())
    _series_tail_check(coeffs, radius)
    prim_coeffs = [0j] + [c / (j + 1) for j, c in enumerate(coeffs)]
    errors = []
    raw_errors = []
    for lv in levels:
        cmap = refine(family, lv)
        ids = sample_ids(family, lv)
        z = cmap.positions - cmap.positions[cmap.origin]
        fv = _horner(coeffs, z)
        pins = canonical_pins(cmap)
        proj = solve_boundary(cmap, {int(i): complex(fv[i]) for i in pins})
        prim = primitive(proj, check=False)
        exact = _horner(prim_coeffs, z)
        errors.append(float(np.abs(prim.values[ids] - exact[ids]).max()))
        raw = primitive(VertexFunction(cmap, fv), check=False)
        raw_errors.append(float(np.abs(raw.values[ids] - exact[ids]).max()))
    return _report(
        family, "primitive of series", levels, errors, {"raw_sup_errors": raw_errors}
    )


def series_approximation(family: RefiningFamily, coefficients, levels=None) -> ConvergenceReport:
    """Truncated monomial series against the continuous f.

    The truncation degree follows the diagonal rule N(l) = l + 2, capped
    where the divergence envelope |a_N| (N! / 2^{N-1}) R^N starts growing;
    the degrees used are logged in extras["degrees"]. Emits a warning when
    the used terms |a_k| sup|Z^{:k:}| fail to decay.
    """
    coeffs = [complex(c) for c in coefficients]
    if not coeffs:
        raise ValidationError("empty coefficient list")
    levels = _levels(family, levels)
    radius = float(np.abs(refine(family, levels[0]).positions).max())
    _series_tail_check(coeffs, radius)
    env = [
        abs(c) * math.factorial(j) / 2.0 ** (j - 1) * radius**j
        for j, c in enumerate(coeffs)
    ]
    # stop below the first degree whose envelope exceeds the last nonzero one
    cap = len(coeffs) - 1
    prev = None
    for j, e in enumerate(env):
        if e == 0.0:
            continue
        if prev is not None and e > prev * (1 + 1e-12):
            cap = j - 1
            break
        prev = e
    cap = max(cap, 1)
    errors = []
    degrees = []
    for lv in levels:
        cmap = refine(family, lv)
        ids = sample_ids(family, lv)
        z = cmap.positions - cmap.positions[cmap.origin]
        n_used = min(lv + 2, cap, len(coeffs) - 1)
        degrees.append(n_used)
        total = np.zeros(cmap.vertex_count, dtype=np.complex128)
        sups = []
        for k in range(n_used + 1):
            term = coeffs[k] * monomial(cmap, k).values
            sups.append(float(np.abs(term).max()))
            total += term
        if len(sups) >= 3 and sups[-1] > sups[-2] > sups[-3]:
            warnings.warn(
                f"series terms grow over the used range at level {lv}: "
                f"|a_k| sup|Z^k| tail {sups[-3:]} is not decaying",
                SeriesDivergenceWarning,
                stacklevel=2,
            )
        exact = _horner(coeffs, z)
        errors.append(float(np.abs(total[ids] - exact[ids]).max()))
    return _report(
        family, "series approximation", levels, errors, {"degrees": degrees}
    )


def exp_convergence(family: RefiningFamily, lam, levels=None) -> ConvergenceReport:
    """Rational exponential against exp(lam (z - O))."""
    lam = complex(lam)
    levels = _levels(family, levels)
    for lv in levels:
        if abs(lam) >= 2.0 / family.delta_at(lv):
            raise ConvergenceDomainError(
                f"|lam| = {abs(lam):.3g} is outside the convergence disc at "
                f"level {lv} (radius {2.0 / family.delta_at(lv):.3g})"
            )
    errors = []
    for lv in levels:
        cmap = refine(family, lv)
        ids = sample_ids(family, lv)
        z = cmap.positions - cmap.positions[cmap.origin]
        e = exp_product(cmap, lam)
        errors.append(float(np.abs(e.values[ids] - np.exp(lam * z[ids])).max()))
    return _report(family, f"exp lambda={lam}", levels, errors)
