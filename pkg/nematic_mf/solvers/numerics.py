"""
Quadrature on the half-sphere and Legendre polynomials.

Every integral over orientations is written in u = cos(theta) on [0, 1],
which absorbs the sin(theta) Jacobian. Integrals over the half-sphere pick
up an extra factor 2*pi from the azimuth, applied by the callers.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.typing import ArrayLike, NDArray

from nematic_mf.exceptions import InvalidArgumentError, NumericalDomainError

MAX_DEGREE = 16
# Tolerance on 2*pi*sum(w*nu) - 1 for orientation densities.
NORMALIZATION_TOL = 1e-12
DEFAULT_ORDER = 64
DEFAULT_LEVELS = 12

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Nodes and weights approximating the integral over u in [0, 1].

    :param nodes: abscissae strictly inside (0, 1).
    :param weights: positive weights summing to one.
    """

    nodes: FloatArray
    weights: FloatArray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise InvalidArgumentError("nodes and weights must be equal-length vectors")
        if np.any(nodes <= 0.0) or np.any(nodes >= 1.0):
            raise InvalidArgumentError("quadrature nodes must lie strictly inside (0, 1)")
        if np.any(weights <= 0.0):
            raise InvalidArgumentError("quadrature weights must be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def order(self) -> int:
        """Number of nodes."""
        return int(self.nodes.size)

    @property
    def theta(self) -> FloatArray:
        """Polar angles of the nodes."""
        return np.arccos(self.nodes)

    def integrate(self, values: ArrayLike) -> float:
        """
        Apply the rule to function values sampled at the nodes.

        :param values: samples, shape (order,).
        :return: approximation of the integral over [0, 1].
        """
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))


def _check_order(n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"node count must be a positive integer, got {n!r}")


@lru_cache(maxsize=32)
def gauss_rule(n: int) -> QuadratureRule:
    """
    Gauss-Legendre rule mapped affinely from [-1, 1] to [0, 1].

    Exact for polynomials in u of degree up to 2n - 1.

    :param n: node count.
    :raises InvalidArgumentError: if n < 1.
    :return: quadrature rule.
    """
    _check_order(n)
    x, w = npleg.leggauss(int(n))
    return QuadratureRule(nodes=0.5 * (x + 1.0), weights=0.5 * w)


@lru_cache(maxsize=32)
def graded_rule(n: int, levels: int, ratio: float = 0.25) -> QuadratureRule:
    """
    Composite Gauss rule with panels shrinking geometrically toward u = 1.

    Panel breakpoints are 1 - ratio**j for j = 0..levels, plus the end point 1.
    Boltzmann factors exp(-k (1 - u**2)) develop a boundary layer of width 1/k
    at u = 1; the smallest panel resolves k up to about ratio**-levels.

    :param n: nodes per panel.
    :param levels: number of graded breakpoints after 0.
    :param ratio: shrink factor between consecutive panels, in (0, 1).
    :return: quadrature rule with n * (levels + 1) nodes.
    """
    _check_order(n)
    if levels < 0:
        raise InvalidArgumentError("levels must be non-negative")
    if not 0.0 < ratio < 1.0:
        raise InvalidArgumentError("ratio must lie in (0, 1)")
    x, w = npleg.leggauss(int(n))
    edges = np.append(1.0 - ratio ** np.arange(levels + 1), 1.0)
    lower, upper = edges[:-1], edges[1:]
    half = 0.5 * (upper - lower)
    nodes = (lower + half)[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return QuadratureRule(nodes=nodes.ravel(), weights=weights.ravel())


def theta_rule(rule: QuadratureRule) -> tuple[FloatArray, FloatArray]:
    """
    Transplant a rule on [0, 1] to theta in [0, pi/2] via theta = (pi/2)(1 - u).

    A rule graded toward u = 1 becomes graded toward theta = 0.

    :param rule: rule on [0, 1].
    :return: nodes and weights in theta.
    """
    half_pi = 0.5 * np.pi
    return half_pi * (1.0 - rule.nodes), half_pi * rule.weights


def half_sphere_integrate(
    rule: QuadratureRule,
    f: Callable[[FloatArray], ArrayLike],
) -> float:
    """
    Approximate the integral of f(theta) sin(theta) over [0, pi/2].

    :param rule: quadrature rule in u.
    :param f: vectorized function of the polar angle.
    :raises NumericalDomainError: if f is not finite at some node.
    :return: integral value.
    """
    theta = rule.theta
    values = np.broadcast_to(np.asarray(f(theta), dtype=np.float64), theta.shape)
    if not np.all(np.isfinite(values)):
        raise NumericalDomainError("integrand is not finite at a quadrature node")
    return rule.integrate(values)


def _check_degree(degree: int) -> None:
    if isinstance(degree, bool) or not isinstance(degree, (int, np.integer)):
        raise InvalidArgumentError(f"Legendre degree must be an integer, got {degree!r}")
    if degree < 0 or degree > MAX_DEGREE:
        raise InvalidArgumentError(
            f"Legendre degree must lie in [0, {MAX_DEGREE}], got {degree}",
        )
    if degree % 2:
        raise InvalidArgumentError(
            f"odd Legendre degree {degree} is not antipodally symmetric",
        )


def legendre_table(max_degree: int, u: ArrayLike) -> FloatArray:
    """
    Values of P_0 .. P_max_degree at the points u.

    :param max_degree: highest degree, at most MAX_DEGREE.
    :param u: evaluation points.
    :return: array of shape (max_degree + 1, *u.shape).
    """
    if max_degree < 0 or max_degree > MAX_DEGREE:
        raise InvalidArgumentError(
            f"Legendre degree must lie in [0, {MAX_DEGREE}], got {max_degree}",
        )
    x = np.asarray(u, dtype=np.float64)
    table = np.empty((max_degree + 1, *x.shape))
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = x
    for k in range(1, max_degree):
        table[k + 1] = ((2 * k + 1) * x * table[k] - k * table[k - 1]) / (k + 1)
    return table


def legendre_p(degree: int, u: ArrayLike) -> Union[float, FloatArray]:
    """
    Even Legendre polynomial by the three-term recurrence.

    :param degree: even degree in [0, 16].
    :param u: point(s) in [-1, 1].
    :raises InvalidArgumentError: for odd or out-of-range degrees.
    :return: P_degree(u), a float for scalar input.
    """
    _check_degree(degree)
    values = legendre_table(int(degree), u)[int(degree)]
    if values.ndim == 0:
        return float(values)
    return values
