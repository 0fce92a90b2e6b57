"""Minimising the bounds over the carrier couplings.

Every bound in :mod:`mcqlimits.bounds` with fixed squeezing, homodyne
angles and loss has the shape

    B(kappa) = (1 - sum_i c1_i kappa_i)**2 / sum_i c2_i kappa_i + sum_i c3_i kappa_i

in units of ``h_sql**2 / 8``.  B is convex wherever ``sum c2 kappa > 0``
and its minimum over the non-negative orthant is reached with a single
carrier switched on.  This module extracts the coefficients, locates the
single-carrier optima, describes the degenerate families of equally good
multi-carrier configurations and brute-force checks that nothing beats a
single carrier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import bounds
from .exceptions import ContractError, DivergenceError


class BoundKind(str, enum.Enum):
    FUNDAMENTAL = "fundamental"
    HOMODYNE = "homodyne"
    SIGNAL_QUADRATURE = "signal_quadrature"


@dataclass(frozen=True)
class AbstractBoundCoefficients:
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray

    def __post_init__(self):
        arrays = [np.atleast_1d(np.asarray(c, dtype=float)) for c in (self.c1, self.c2, self.c3)]
        if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
            raise ContractError("coefficient vectors must be 1-D and of equal length")
        for name, a in zip(("c1", "c2", "c3"), arrays):
            object.__setattr__(self, name, a)

    @property
    def n_carriers(self) -> int:
        return self.c1.size

    def evaluate(self, kappas) -> np.ndarray:
        """B at one configuration (shape ``(d,)``) or many (shape ``(N, d)``).

        Configurations with ``sum c2 kappa = 0`` evaluate to ``inf``.
        """
        K = np.asarray(kappas, dtype=float)
        s1, s2, s3 = K @ self.c1, K @ self.c2, K @ self.c3
        with np.errstate(divide="ignore", invalid="ignore"):
            B = np.where(s2 > 0, (1 - s1) ** 2 / np.where(s2 > 0, s2, 1.0) + s3, np.inf)
        return B if B.ndim else float(B)

    def single(self, i: int):
        return float(self.c1[i]), float(self.c2[i]), float(self.c3[i])


def extract_coefficients_analytic(kind, r, phi, eta: float, thetas=None) -> AbstractBoundCoefficients:
    """Read ``(c1, c2, c3)`` off the closed-form bound of the given kind."""
    kind = BoundKind(kind)
    if not 0 < eta <= 1:
        raise ContractError(f"transmittivity must lie in (0, 1], got {eta}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if kind is BoundKind.HOMODYNE:
        if thetas is None:
            raise ContractError("homodyne coefficients need the homodyne angles")
        m = bounds.squeeze_matrices(r, phi, eta, thetas)
        c1 = eta * (m.G**2 * m.S + m.F * m.G * m.Q) / m.Y
        c2 = eta * m.G**2 / m.Y
        c3 = (1 - eta) * m.Q / m.Y + eta * m.G**2 / m.Y
    else:
        m = bounds.squeeze_matrices(r, phi, eta)
        if kind is BoundKind.FUNDAMENTAL:
            c1 = (1 - eta) * eta * m.S * m.Gamma
            c2 = eta * m.Gamma * ((1 - eta) + eta * m.Q)
            c3 = (1 - eta) * m.P * m.Gamma
        else:
            c1 = eta * m.S / m.T
            c2 = eta / m.T
            c3 = m.P / m.T
    return AbstractBoundCoefficients(c1, c2, c3)


def extract_coefficients_probe(bound_fn: Callable[[float], float], carrier_index: int = 0,
                               probes: Sequence[float] = (0.5, 1.0, 2.0)):
    """Recover ``(c1, c2, c3)`` of one carrier from three evaluations of its bound.

    With the other carriers off, ``B(k) = a/k + b + c k`` where
    ``a = 1/c2``, ``b = -2 c1/c2`` and ``c = c1**2/c2 + c3``.
    ``bound_fn`` takes that carrier's coupling and returns B in
    ``h_sql**2 / 8`` units; ``carrier_index`` is only carried for reporting.
    """
    k = np.asarray(probes, dtype=float)
    if k.size != 3 or np.unique(k).size != 3 or np.any(k <= 0):
        raise ContractError("need three distinct positive probe couplings")
    A = np.column_stack([1 / k, np.ones(3), k])
    y = np.array([bound_fn(float(x)) for x in k])
    a, b, c = np.linalg.solve(A, y)
    c2 = 1 / a
    c1 = -b * c2 / 2
    c3 = c - c1**2 / c2
    return float(c1), float(c2), float(c3)


@dataclass(frozen=True)
class SingleCarrierOptimum:
    """Best coupling for one carrier on its own.

    In the shot-noise regime (``c3 = 0``) the bound keeps falling as the
    coupling grows: ``kappa_star`` is ``inf`` and ``bound_star`` the
    infimum 0.
    """

    kappa_star: float
    bound_star: float
    shot_noise: bool = False


def single_carrier_optimum(c1: float, c2: float, c3: float) -> SingleCarrierOptimum:
    if c2 <= 0:
        raise DivergenceError("c2 = 0: this carrier carries no signal")
    if c3 < 0:
        raise ContractError("c3 must be non-negative")
    if c3 == 0:
        if c1 != 0:
            raise ContractError("c3 = 0 with c1 != 0 lies outside the physical coefficient family")
        return SingleCarrierOptimum(np.inf, 0.0, shot_noise=True)
    kappa = 1 / np.sqrt(c1**2 + c2 * c3)
    value = -2 * c1 / c2 + 2 * np.sqrt((c1 / c2) ** 2 + c3 / c2)
    return SingleCarrierOptimum(float(kappa), float(value))


def _rho(coeffs: AbstractBoundCoefficients, kappas: np.ndarray) -> tuple:
    s2 = float(kappas @ coeffs.c2)
    if s2 <= 0:
        raise DivergenceError("sum of c2 * kappa vanishes")
    return (1 - float(kappas @ coeffs.c1)) / s2, s2


def bound_gradient(coeffs: AbstractBoundCoefficients, kappas) -> np.ndarray:
    k = np.asarray(kappas, dtype=float)
    rho, _ = _rho(coeffs, k)
    return -coeffs.c2 * rho**2 - 2 * coeffs.c1 * rho + coeffs.c3


def bound_hessian(coeffs: AbstractBoundCoefficients, kappas) -> np.ndarray:
    """Rank-one, positive semi-definite Hessian of B."""
    k = np.asarray(kappas, dtype=float)
    rho, s2 = _rho(coeffs, k)
    v = coeffs.c1 + coeffs.c2 * rho
    return 2 / s2 * np.outer(v, v)


def class_invariant(c1, c2, c3):
    """``-c1/c2 + sqrt((c1/c2)**2 + c3/c2)``: the stationary value of ``(1 - sum c1 k)/sum c2 k``."""
    q = np.asarray(c1, dtype=float) / np.asarray(c2, dtype=float)
    return -q + np.sqrt(q**2 + np.asarray(c3, dtype=float) / np.asarray(c2, dtype=float))


@dataclass(frozen=True)
class DegenerateFamily:
    """Carriers whose configurations on ``sum_j weights_j kappa_j = 1`` all reach ``bound_value``.

    The vertices of that simplex (single carriers) are its smallest- and
    largest-total-coupling members.
    """

    indices: tuple
    weights: np.ndarray
    bound_value: float
    samples: np.ndarray
    max_rel_variation: float

    def vertices(self) -> np.ndarray:
        d = self.samples.shape[1]
        out = np.zeros((len(self.indices), d))
        for row, (i, w) in enumerate(zip(self.indices, self.weights)):
            out[row, i] = 1 / w
        return out


@dataclass(frozen=True)
class OptimumReport:
    best_carrier_index: int
    kappa_star: float
    bound_star: float
    classes: list
    degenerate_family: Optional[DegenerateFamily] = None
    shot_noise: bool = False
    # the minus-branch classes require negative couplings and are never built
    negative_branch_discarded: bool = field(default=True)

    def configuration(self, d: int) -> np.ndarray:
        k = np.zeros(d)
        k[self.best_carrier_index] = self.kappa_star
        return k


def _group(values: np.ndarray, rtol: float) -> list:
    classes: list = []
    for i in np.argsort(values, kind="stable"):
        if classes and abs(values[i] - values[classes[-1][0]]) <= rtol * max(abs(values[i]), abs(values[classes[-1][0]])):
            classes[-1].append(int(i))
        else:
            classes.append([int(i)])
    return [sorted(c) for c in classes]


def degenerate_family(coeffs: AbstractBoundCoefficients, *, rtol: float = 1e-10, n_samples: int = 10,
                      rng: Optional[np.random.Generator] = None) -> OptimumReport:
    """Locate the best single carrier and the family of configurations tied with it.

    Carriers are grouped by equality of :func:`class_invariant` (relative
    tolerance ``rtol``).  Within the winning group every point of
    ``sum_j sqrt(c1_j**2 + c2_j c3_j) kappa_j = 1`` attains the optimum; the
    report carries ``n_samples`` random points of that simplex and the
    largest relative spread of B over them.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    c1, c2, c3 = coeffs.c1, coeffs.c2, coeffs.c3
    live = np.flatnonzero(c2 > 0)
    if live.size == 0:
        raise DivergenceError("no carrier carries signal")
    if np.all(c3[live] == 0):
        return OptimumReport(int(live[0]), np.inf, 0.0, [live.tolist()], None, shot_noise=True)
    live = live[c3[live] > 0]
    rho = class_invariant(c1[live], c2[live], c3[live])
    values = 2 * rho
    classes = [[int(live[j]) for j in c] for c in _group(rho, rtol)]
    best = int(live[np.argmin(values)])
    opt = single_carrier_optimum(*coeffs.single(best))

    family = None
    members = next(c for c in classes if best in c)
    if len(members) > 1:
        idx = np.array(members)
        weights = np.sqrt(c1[idx] ** 2 + c2[idx] * c3[idx])
        lam = rng.dirichlet(np.ones(idx.size), size=n_samples)
        samples = np.zeros((n_samples, coeffs.n_carriers))
        samples[:, idx] = lam / weights
        B = coeffs.evaluate(samples)
        spread = float(np.max(np.abs(B - opt.bound_star)) / abs(opt.bound_star))
        family = DegenerateFamily(tuple(members), weights, opt.bound_star, samples, spread)
    return OptimumReport(best, opt.kappa_star, opt.bound_star, classes, family)


def default_grid_points(d: int) -> int:
    return 64 if d <= 3 else 24


@dataclass(frozen=True)
class DominanceReport:
    """Outcome of the brute-force search for a multi-carrier configuration beating every single carrier.

    ``passed`` is ``None`` in the shot-noise regime, where no finite optimum exists.
    """

    passed: Optional[bool]
    best_single_index: int
    best_single_bound: float
    best_single_kappa: float
    search_min: float
    search_argmin: np.ndarray
    n_evaluated: int
    shot_noise: bool = False
    tolerance: float = 1e-9

    @property
    def margin(self) -> float:
        """``search_min - best_single_bound``; negative means a multi-carrier win."""
        return self.search_min - self.best_single_bound

    @property
    def argmin_support(self) -> int:
        return int(np.count_nonzero(self.search_argmin))


def verify_single_carrier_dominance(kind, r, phi, eta: float, thetas=None, *, grid_points: Optional[int] = None,
                                    n_random: int = 10_000, tolerance: float = 1e-9,
                                    rng: Optional[np.random.Generator] = None) -> DominanceReport:
    """Grid plus random search over ``[0, 4 kappa*]^d`` for anything below the best single carrier."""
    coeffs = extract_coefficients_analytic(kind, r, phi, eta, thetas)
    d = coeffs.n_carriers
    if d > 4:
        raise ContractError("exhaustive dominance grids are limited to four carriers")
    rng = np.random.default_rng(0) if rng is None else rng
    report = degenerate_family(coeffs, rng=rng)
    if report.shot_noise:
        return DominanceReport(None, report.best_carrier_index, 0.0, np.inf, 0.0, np.zeros(d), 0, True, tolerance)

    stars = [single_carrier_optimum(*coeffs.single(i)).kappa_star
             for i in range(d) if coeffs.c2[i] > 0 and coeffs.c3[i] > 0]
    upper = 4 * max(stars)
    n = default_grid_points(d) if grid_points is None else grid_points
    axis = np.linspace(0.0, upper, n)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    points = np.vstack([grid, rng.uniform(0.0, upper, size=(n_random, d))])
    B = coeffs.evaluate(points)
    j = int(np.argmin(B))
    passed = bool(B[j] >= report.bound_star - tolerance)
    return DominanceReport(passed, report.best_carrier_index, report.bound_star, report.kappa_star,
                           float(B[j]), points[j], points.shape[0], False, tolerance)
