"""
Homogeneous self-consistency equation.

The density form nu = exp(-beta H_nu) / Z is solved by damped Picard
iteration. For the Maier-Saupe potential H_nu depends on nu only through
the order parameter xi = <sin^2 theta>, which reduces the equation to the
scalar fixed point xi = F(beta, xi).
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike
from scipy.optimize import brentq
from scipy.special import dawsn, erf

from nematic_mf.exceptions import InvalidArgumentError, InvariantViolationError
from nematic_mf.solvers.numerics import (
    DEFAULT_LEVELS,
    DEFAULT_ORDER,
    NORMALIZATION_TOL,
    FloatArray,
    QuadratureRule,
    graded_rule,
    legendre_table,
)
from nematic_mf.solvers.potential import AxisymmetricPotential, effective_potential

ISOTROPIC_XI = 2.0 / 3.0
# Roots closer than this are the same root.
ROOT_MERGE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class OrientationDensity:
    """
    Probability density on the half-sphere, sampled at the nodes of a rule.

    Normalization is 2*pi * sum_i w_i nu(u_i) = 1.

    :param values: density at the nodes.
    :param rule: quadrature rule carrying the nodes.
    """

    values: FloatArray
    rule: QuadratureRule

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.rule.nodes.shape:
            raise InvalidArgumentError(
                f"density has {values.size} values for {self.rule.order} nodes",
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise InvalidArgumentError("density values must be finite and non-negative")
        mass = 2.0 * math.pi * self.rule.integrate(values)
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise InvalidArgumentError(f"density is not normalized: mass {mass!r}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, rule: QuadratureRule, values: ArrayLike) -> "OrientationDensity":
        """
        Normalize non-negative values into a density.

        :param rule: quadrature rule.
        :param values: unnormalized values at the nodes.
        :return: density.
        """
        raw = np.asarray(values, dtype=np.float64)
        mass = 2.0 * math.pi * rule.integrate(raw)
        if not math.isfinite(mass) or mass <= 0.0:
            raise InvalidArgumentError("values have no positive finite mass")
        return cls(values=raw / mass, rule=rule)

    @classmethod
    def uniform(cls, rule: QuadratureRule) -> "OrientationDensity":
        """Isotropic density 1 / (2 pi), normalized against the rule's weights."""
        return cls.from_values(rule, np.ones(rule.order))

    @classmethod
    def prolate(cls, rule: QuadratureRule, strength: float = 5.0) -> "OrientationDensity":
        """Seed concentrated around the pole, proportional to exp(strength u^2)."""
        return cls.from_values(rule, np.exp(strength * (rule.nodes**2 - 1.0)))

    @classmethod
    def oblate(cls, rule: QuadratureRule, strength: float = 5.0) -> "OrientationDensity":
        """Seed concentrated around the equator, proportional to exp(-strength u^2)."""
        return cls.from_values(rule, np.exp(-strength * rule.nodes**2))

    def moment(self, degree: int) -> float:
        """
        Legendre moment <P_l(cos theta)> under the density.

        :param degree: Legendre degree.
        :return: moment.
        """
        table = legendre_table(degree, self.rule.nodes)
        return 2.0 * math.pi * self.rule.integrate(table[degree] * self.values)


@dataclass(frozen=True, eq=False)
class FixedPointResult:
    """Outcome of the density iteration."""

    density: OrientationDensity
    residual: float
    iterations: int
    converged: bool
    order_parameter: float


def order_parameter(nu: OrientationDensity) -> float:
    """
    xi = <sin^2 theta> = (2/3)(1 - <P_2>).

    :param nu: density.
    :return: order parameter in [0, 1].
    """
    u = nu.rule.nodes
    xi = 2.0 * math.pi * nu.rule.integrate(nu.values * (1.0 - u * u))
    return min(max(xi, 0.0), 1.0)


def _check_beta(beta: float) -> None:
    if not math.isfinite(beta) or beta < 0.0:
        raise InvalidArgumentError(f"inverse temperature must be finite and >= 0, got {beta!r}")


def sce_map(beta: float, U: AxisymmetricPotential, nu: OrientationDensity) -> OrientationDensity:
    """
    Self-consistency map nu -> exp(-beta H_nu) / Z.

    min H_nu is subtracted before exponentiating; Z absorbs the shift.

    :param beta: inverse temperature.
    :param U: pair potential.
    :param nu: current density.
    :return: image density.
    """
    _check_beta(beta)
    molecular_field = effective_potential(U, nu).values
    boltzmann = np.exp(-beta * (molecular_field - np.min(molecular_field)))
    return OrientationDensity.from_values(nu.rule, boltzmann)


def sce_residual(beta: float, U: AxisymmetricPotential, nu: OrientationDensity) -> float:
    """
    Sup-norm distance between nu and its image under the map.

    :param beta: inverse temperature.
    :param U: pair potential.
    :param nu: density.
    :return: residual.
    """
    return float(np.max(np.abs(nu.values - sce_map(beta, U, nu).values)))


def solve_density(
    beta: float,
    U: AxisymmetricPotential,
    nu0: OrientationDensity,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> FixedPointResult:
    """
    Damped Picard iteration nu <- (1 - damping) nu + damping * sce_map(nu).

    Every iterate is a convex combination of densities, so positivity and
    normalization hold at each step.

    :param beta: inverse temperature.
    :param U: pair potential.
    :param nu0: initial density.
    :param damping: relaxation weight in (0, 1].
    :param tol: sup-norm residual at which the iteration stops.
    :param max_iter: maximal number of updates.
    :return: result; non-convergence is reported, not raised.
    """
    if not tol > 0.0:
        raise InvalidArgumentError("tolerance must be positive")
    if not 0.0 < damping <= 1.0:
        raise InvalidArgumentError("damping must lie in (0, 1]")
    if max_iter < 0:
        raise InvalidArgumentError("max_iter must be non-negative")
    _check_beta(beta)

    rule = nu0.rule
    density = nu0
    residual = math.inf
    iteration = 0
    while True:
        image = sce_map(beta, U, density)
        residual = float(np.max(np.abs(density.values - image.values)))
        if residual <= tol or iteration >= max_iter:
            break
        iteration += 1
        mixed = (1.0 - damping) * density.values + damping * image.values
        density = OrientationDensity.from_values(rule, mixed)
        if iteration % 1000 == 0:
            logger.debug("density iteration {} residual {:.3e}", iteration, residual)

    converged = residual <= tol
    if not converged:
        logger.warning(
            "density iteration at beta={} stopped after {} updates, residual {:.3e}",
            beta,
            iteration,
            residual,
        )
    return FixedPointResult(
        density=density,
        residual=residual,
        iterations=iteration,
        converged=converged,
        order_parameter=order_parameter(density),
    )


def seed_density(rule: QuadratureRule, xi: float) -> OrientationDensity:
    """
    Density proportional to exp(kappa P_2(u)) with order parameter xi.

    :param rule: quadrature rule.
    :param xi: target order parameter in (0, 1).
    :raises InvalidArgumentError: if xi is outside (0, 1) or not resolvable.
    :return: density.
    """
    if not 0.0 < xi < 1.0:
        raise InvalidArgumentError(f"seed order parameter must lie in (0, 1), got {xi!r}")
    p2 = legendre_table(2, rule.nodes)[2]

    def _density(kappa: float) -> OrientationDensity:
        exponent = kappa * p2
        return OrientationDensity.from_values(rule, np.exp(exponent - np.max(exponent)))

    def _gap(kappa: float) -> float:
        return order_parameter(_density(kappa)) - xi

    if abs(xi - ISOTROPIC_XI) < 1e-15:
        return OrientationDensity.uniform(rule)
    bound = 50.0
    while _gap(bound) > 0.0 or _gap(-bound) < 0.0:
        bound *= 2.0
        if bound > 1e6:
            raise InvalidArgumentError(f"order parameter {xi} is not resolved by this rule")
    kappa = brentq(_gap, -bound, bound, xtol=1e-14, rtol=1e-14)
    return _density(kappa)


def default_scalar_rule() -> QuadratureRule:
    """Graded rule used by the scalar reduction unless told otherwise."""
    return graded_rule(DEFAULT_ORDER, DEFAULT_LEVELS)


@dataclass(frozen=True)
class ScalarRoot:
    """
    A root of G(beta, xi) = xi - F(beta, xi).

    ScalarReduction.solve reports the isotropic root with xi set to
    ISOTROPIC_XI exactly; other roots lie further than ROOT_MERGE_TOL from it.
    """

    xi: float
    dF_dxi: float  # noqa: N815
    stable: bool
    oblate: bool
    residual: float


@dataclass(frozen=True, eq=False)
class ScalarReduction:
    """
    Scalar form of the Maier-Saupe self-consistency equation.

    F(beta, xi) is the sin^2 average of exp(-beta w (1 - 3 xi / 2)(1 - P_2)),
    so the model depends on beta and w only through beta * w.

    :param rule: quadrature rule in u, graded toward u = 1 for large beta.
    :param w: Maier-Saupe coupling.
    :param scan_points: uniform scan size on [0, 1] for root isolation.
    :param fd_step: central difference step for dF/dxi.
    """

    rule: QuadratureRule
    w: float = 1.0
    scan_points: int = 2000
    fd_step: float = 1e-5

    def __post_init__(self) -> None:
        if not self.w > 0.0:
            raise InvalidArgumentError(f"coupling w must be positive, got {self.w!r}")
        if self.scan_points < 100:
            raise InvalidArgumentError("scan_points must be at least 100")

    def f(self, beta: float, xi: ArrayLike) -> Union[float, FloatArray]:
        """
        F(beta, xi), vectorized in xi.

        :param beta: inverse temperature.
        :param xi: order parameter value(s).
        :return: F with the shape of xi.
        """
        _check_beta(beta)
        x = np.asarray(xi, dtype=np.float64)
        u = self.rule.nodes
        sin2 = 1.0 - u * u
        # exponent of exp(-beta w (1 - 1.5 xi)(1 - P2)), with 1 - P2 = 1.5 sin^2
        strength = np.asarray(1.5 * beta * self.w * (1.0 - 1.5 * x))
        exponent = -strength[..., None] * sin2
        boltzmann = np.exp(exponent - np.max(exponent, axis=-1, keepdims=True))
        weighted = boltzmann * self.rule.weights
        values = np.sum(weighted * sin2, axis=-1) / np.sum(weighted, axis=-1)
        if values.ndim == 0:
            return float(values)
        return values

    def g(self, beta: float, xi: ArrayLike) -> Union[float, FloatArray]:
        """G(beta, xi) = xi - F(beta, xi)."""
        return np.asarray(xi, dtype=np.float64) - self.f(beta, xi)

    def df_dxi(self, beta: float, xi: ArrayLike) -> Union[float, FloatArray]:
        """
        Central finite difference of F in xi.

        :param beta: inverse temperature.
        :param xi: order parameter value(s).
        :return: derivative estimate.
        """
        x = np.asarray(xi, dtype=np.float64)
        h = self.fd_step
        slope = (np.asarray(self.f(beta, x + h)) - np.asarray(self.f(beta, x - h))) / (2.0 * h)
        if slope.ndim == 0:
            return float(slope)
        return slope

    def deflated(self, beta: float, xi: ArrayLike) -> FloatArray:
        """
        G(beta, xi) / (xi - 2/3), the residual with the isotropic root divided out.

        F(beta, 2/3) = 2/3 for every beta, so this equals
        1 - (F(xi) - 2/3) / (xi - 2/3) and tends to 1 - dF/dxi at 2/3.

        :param beta: inverse temperature.
        :param xi: order parameter value(s).
        :return: deflated residual.
        """
        x = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        offset = x - ISOTROPIC_XI
        near = np.abs(offset) < 1e-12
        safe = np.where(near, 1.0, offset)
        values = 1.0 - (np.asarray(self.f(beta, x)) - ISOTROPIC_XI) / safe
        if np.any(near):
            values = np.where(near, 1.0 - self.df_dxi(beta, ISOTROPIC_XI), values)
        return values

    def _deflated_scalar(self, xi: float, beta: float) -> float:
        return float(self.deflated(beta, xi)[0])

    def make_root(self, beta: float, xi: float) -> ScalarRoot:
        """
        Tag a root with its slope and stability.

        :param beta: inverse temperature.
        :param xi: root location.
        :return: tagged root.
        """
        slope = float(self.df_dxi(beta, xi))
        oblate = xi > ISOTROPIC_XI + ROOT_MERGE_TOL
        return ScalarRoot(
            xi=float(xi),
            dF_dxi=slope,
            stable=slope < 1.0 and not oblate,
            oblate=oblate,
            residual=abs(float(self.g(beta, xi))),
        )

    def solve(self, beta: float, tol: float = 1e-10) -> list[ScalarRoot]:
        """
        All roots of G(beta, .) on [0, 1], ascending.

        The isotropic root 2/3 is always present. The others are bracketed by
        sign changes of the deflated residual on a uniform scan and refined by
        Brent's method to `tol`.

        :param beta: inverse temperature.
        :param tol: root tolerance in xi.
        :raises InvariantViolationError: if 2/3 does not solve the equation.
        :return: tagged roots.
        """
        iso_residual = abs(float(self.g(beta, ISOTROPIC_XI)))
        if iso_residual > 1e-12:
            raise InvariantViolationError(
                f"isotropic state misses the fixed point by {iso_residual:.3e} at beta={beta}",
            )
        grid = np.linspace(0.0, 1.0, self.scan_points)
        values = self.deflated(beta, grid)
        found: list[float] = [ISOTROPIC_XI]
        for index in np.flatnonzero(values == 0.0):
            found.append(float(grid[index]))
        crossings = np.flatnonzero(values[:-1] * values[1:] < 0.0)
        for index in crossings:
            root = brentq(
                self._deflated_scalar,
                grid[index],
                grid[index + 1],
                args=(beta,),
                xtol=tol,
                rtol=4 * np.finfo(float).eps,
            )
            found.append(float(root))
        distinct: list[float] = []
        for xi in sorted(found, key=lambda x: (x != ISOTROPIC_XI, x)):
            if all(abs(xi - kept) > ROOT_MERGE_TOL for kept in distinct):
                distinct.append(xi)
        return [self.make_root(beta, xi) for xi in sorted(distinct)]


def f_scalar(
    beta: float,
    xi: ArrayLike,
    rule: Optional[QuadratureRule] = None,
    w: float = 1.0,
) -> Union[float, FloatArray]:
    """
    F(beta, xi) = <sin^2 theta> under exp(-beta w (1 - 3 xi / 2)(1 - P_2(cos theta))).

    :param beta: inverse temperature.
    :param xi: order parameter value(s).
    :param rule: quadrature rule, graded by default.
    :param w: Maier-Saupe coupling.
    :return: F.
    """
    return ScalarReduction(rule or default_scalar_rule(), w=w).f(beta, xi)


def solve_scalar(
    beta: float,
    scan_points: int = 2000,
    tol: float = 1e-10,
    rule: Optional[QuadratureRule] = None,
    w: float = 1.0,
) -> list[ScalarRoot]:
    """
    Roots of xi = F(beta, xi) with stability tags.

    A root is stable iff dF/dxi < 1 and it is not oblate; oblate roots
    (xi > 2/3) are unphysical and always reported unstable.

    :param beta: inverse temperature.
    :param scan_points: uniform scan size, at least 100.
    :param tol: root tolerance.
    :param rule: quadrature rule, graded by default.
    :param w: Maier-Saupe coupling.
    :return: roots in ascending order.
    """
    reduction = ScalarReduction(rule or default_scalar_rule(), w=w, scan_points=scan_points)
    return reduction.solve(beta, tol=tol)


def f_scalar_exact(beta: float, xi: float, w: float = 1.0) -> float:
    """
    Closed form of F through the Dawson integral and erf.

    With k = 1.5 beta w (1 - 1.5 xi) the weight is proportional to exp(k u^2):
    for k > 0, <u^2> = (sqrt(k) / D(sqrt(k)) - 1) / (2k); for k < 0, q = -k,
    <u^2> = (1 - exp(-q) / I) / (2q) with I = sqrt(pi) erf(sqrt(q)) / (2 sqrt(q)).

    :param beta: inverse temperature.
    :param xi: order parameter.
    :param w: Maier-Saupe coupling.
    :return: F(beta, xi) = 1 - <u^2>.
    """
    k = 1.5 * beta * w * (1.0 - 1.5 * xi)
    if abs(k) < 1e-3:
        second_moment = 1.0 / 3.0 + 4.0 * k / 45.0 + 8.0 * k * k / 945.0
    elif k > 0.0:
        root = math.sqrt(k)
        second_moment = (root / float(dawsn(root)) - 1.0) / (2.0 * k)
    else:
        q = -k
        root = math.sqrt(q)
        integral = math.sqrt(math.pi) * float(erf(root)) / (2.0 * root)
        second_moment = (1.0 - math.exp(-q) / integral) / (2.0 * q)
    return 1.0 - second_moment
