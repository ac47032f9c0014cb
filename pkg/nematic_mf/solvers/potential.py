"""Axisymmetric two-body potentials U(cos gamma) and effective one-body potentials."""

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import TYPE_CHECKING, Annotated, Any, Callable, Literal, Mapping, Optional, Union

import numpy as np
from numpy.polynomial import Legendre
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field, TypeAdapter

from nematic_mf.exceptions import InvalidArgumentError, NumericalDomainError
from nematic_mf.solvers.numerics import (
    MAX_DEGREE,
    NORMALIZATION_TOL,
    FloatArray,
    QuadratureRule,
    legendre_table,
)

if TYPE_CHECKING:
    from nematic_mf.solvers.sce import OrientationDensity

# Trapezoidal points for azimuthal averages; exact for degree < AZIMUTH_POINTS.
AZIMUTH_POINTS = 64


@dataclass(frozen=True, eq=False)
class AxisymmetricPotential:
    """
    Pair potential U(cos gamma) = sum_l c_l P_l(cos gamma), even degrees only.

    :param coeffs: Legendre coefficients keyed by degree.
    :param label: human-readable name.
    """

    coeffs: Mapping[int, float]
    label: str = "legendre"
    _dense: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cleaned: dict[int, float] = {}
        for raw_degree, raw_value in self.coeffs.items():
            degree = int(raw_degree)
            if degree != raw_degree:
                raise InvalidArgumentError(f"degree {raw_degree!r} is not an integer")
            if degree < 0 or degree > MAX_DEGREE:
                raise InvalidArgumentError(
                    f"degree {degree} outside the supported range [0, {MAX_DEGREE}]",
                )
            if degree % 2:
                raise InvalidArgumentError(
                    f"odd degree {degree}: rods have no head or tail, "
                    "only even Legendre terms are allowed",
                )
            value = float(raw_value)
            if not math.isfinite(value):
                raise InvalidArgumentError(f"coefficient c_{degree} is not finite")
            cleaned[degree] = value
        ordered = dict(sorted(cleaned.items()))
        dense = np.zeros(max(ordered, default=0) + 1)
        for degree, value in ordered.items():
            dense[degree] = value
        dense.flags.writeable = False
        object.__setattr__(self, "coeffs", MappingProxyType(ordered))
        object.__setattr__(self, "_dense", dense)

    def __reduce__(self) -> tuple[Any, ...]:
        # mapping proxies do not pickle; worker processes rebuild from a dict
        return (AxisymmetricPotential, (dict(self.coeffs), self.label))

    @property
    def max_degree(self) -> int:
        """Highest degree with a stored coefficient."""
        return int(self._dense.size - 1)

    @property
    def degrees(self) -> tuple[int, ...]:
        """Degrees carrying a non-zero coefficient."""
        return tuple(degree for degree, value in self.coeffs.items() if value != 0.0)

    def coefficient(self, degree: int) -> float:
        """
        Coefficient c_l, zero when absent.

        :param degree: Legendre degree.
        :return: coefficient.
        """
        return float(self.coeffs.get(degree, 0.0))

    def evaluate(self, cos_gamma: ArrayLike) -> FloatArray:
        """
        U at the given cosines of the relative angle.

        :param cos_gamma: values in [-1, 1].
        :return: potential values.
        """
        return np.asarray(
            np.polynomial.legendre.legval(np.asarray(cos_gamma, dtype=np.float64), self._dense),
        )

    def deviation(self) -> "AxisymmetricPotential":
        """U minus its constant part; the kernel of the linearized operator."""
        return AxisymmetricPotential(
            coeffs={degree: value for degree, value in self.coeffs.items() if degree},
            label=f"{self.label}-deviation",
        )

    def half_sphere_integral(self) -> float:
        """Integral of U(m, .) over the half-sphere, 2*pi*c_0 for every m."""
        return 2.0 * math.pi * self.coefficient(0)

    def sup_norm(self) -> float:
        """
        Exact sup of |U| over cos gamma in [0, 1].

        U is a polynomial, so the extrema sit at the end points or at real
        critical points, found from the roots of the derivative.

        :return: max |U|.
        """
        series = Legendre(self._dense)
        candidates = [0.0, 1.0]
        if self.max_degree >= 2:
            roots = series.deriv().roots()
            real = roots[np.abs(roots.imag) < 1e-12].real
            candidates.extend(float(r) for r in real if 0.0 <= r <= 1.0)
        return float(np.max(np.abs(series(np.asarray(candidates)))))


def maier_saupe(w: float) -> AxisymmetricPotential:
    """
    Maier-Saupe interaction U = w (1 - P_2(cos gamma)).

    :param w: coupling constant.
    :raises InvalidArgumentError: if w is not a positive finite number.
    :return: potential with coefficients {0: w, 2: -w}.
    """
    if isinstance(w, bool) or not math.isfinite(w) or w <= 0.0:
        raise InvalidArgumentError(f"coupling w must be positive, got {w!r}")
    return AxisymmetricPotential(coeffs={0: w, 2: -w}, label=f"maier-saupe(w={w:g})")


def legendre_potential(coeffs: Mapping[int, float], label: str = "legendre") -> AxisymmetricPotential:
    """
    Potential from explicit Legendre coefficients.

    :param coeffs: coefficients keyed by even degree.
    :param label: name used in reports.
    :return: potential.
    """
    return AxisymmetricPotential(coeffs=dict(coeffs), label=label)


def azimuthal_average(
    U: AxisymmetricPotential,
    u: ArrayLike,
    u_prime: ArrayLike,
    points: int = AZIMUTH_POINTS,
) -> FloatArray:
    """
    Average of U(m . m') over the azimuth of m', by direct evaluation.

    cos gamma = u u' + sqrt(1 - u^2) sqrt(1 - u'^2) cos(phi); the trapezoidal
    rule on the full period is exact for trigonometric degree below `points`.

    :param U: pair potential.
    :param u: cosines of the first polar angle.
    :param u_prime: cosines of the second polar angle (broadcast against u).
    :param points: azimuthal sample count.
    :return: averaged values with the broadcast shape of u and u_prime.
    """
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(u_prime, dtype=np.float64)
    sin_a = np.sqrt(np.clip(1.0 - a * a, 0.0, None))
    sin_b = np.sqrt(np.clip(1.0 - b * b, 0.0, None))
    cos_phi = np.cos(2.0 * math.pi * np.arange(points) / points)
    cos_gamma = (a * b)[..., None] + (sin_a * sin_b)[..., None] * cos_phi
    return np.mean(U.evaluate(np.clip(cos_gamma, -1.0, 1.0)), axis=-1)


@dataclass(frozen=True, eq=False)
class ConstantMeanCheck:
    """Outcome of the constant-mean check."""

    constant: bool
    deviation: float
    mean: float
    probes: FloatArray = field(repr=False)
    values: FloatArray = field(repr=False)


def check_constant_mean(
    U: AxisymmetricPotential,
    rule: QuadratureRule,
    tol: float = 1e-12,
    probes: Optional[ArrayLike] = None,
) -> ConstantMeanCheck:
    """
    Check that m -> integral of U(m, m') over the half-sphere does not depend on m.

    The integral is evaluated by direct quadrature: the rule in u' and a
    trapezoidal average in the azimuth of m'.

    :param U: pair potential.
    :param rule: quadrature rule in u'.
    :param tol: admissible spread max - min.
    :param probes: polar cosines of the probe orientations.
    :return: diagnostic with the spread of the probe values.
    """
    if probes is None:
        probe_u = np.concatenate(([0.0, 1.0], np.linspace(0.0, 1.0, 21)[1:-1], rule.nodes))
    else:
        probe_u = np.atleast_1d(np.asarray(probes, dtype=np.float64))
    averages = azimuthal_average(U, probe_u[:, None], rule.nodes[None, :])
    values = 2.0 * math.pi * averages @ rule.weights
    deviation = float(np.max(values) - np.min(values))
    return ConstantMeanCheck(
        constant=deviation <= tol,
        deviation=deviation,
        mean=float(np.mean(values)),
        probes=probe_u,
        values=values,
    )


def project_kernel(
    func: Callable[[FloatArray], ArrayLike],
    rule: QuadratureRule,
    max_degree: int = MAX_DEGREE,
    label: str = "projected",
) -> tuple[AxisymmetricPotential, float]:
    """
    Project a tabulated even kernel U(x), x = cos gamma, on P_0 .. P_max_degree.

    c_l = (2l + 1) * integral_0^1 U(x) P_l(x) dx for even l.

    :param func: vectorized kernel on [0, 1].
    :param rule: rule used for the projection integrals.
    :param max_degree: highest even degree kept.
    :param label: name of the resulting potential.
    :raises NumericalDomainError: if the kernel is not finite at a node.
    :return: projected potential and sup-norm truncation residual on a fine grid.
    """
    top = max_degree - max_degree % 2
    values = np.asarray(func(rule.nodes), dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NumericalDomainError("kernel is not finite at a quadrature node")
    table = legendre_table(top, rule.nodes)
    coeffs = {
        degree: (2 * degree + 1) * rule.integrate(values * table[degree])
        for degree in range(0, top + 1, 2)
    }
    potential = AxisymmetricPotential(coeffs=coeffs, label=label)
    grid = np.linspace(0.0, 1.0, 10 * rule.order + 1)
    exact = np.asarray(func(grid), dtype=np.float64)
    residual = float(np.max(np.abs(exact - potential.evaluate(grid))))
    return potential, residual


@dataclass(frozen=True, eq=False)
class EffectivePotential:
    """
    Molecular field H_nu felt by one rod in the averaged field of the others.

    :param values: H_nu at the quadrature nodes.
    :param legendre_moments: <P_l> under nu for every active degree, <P_0> = 1.
    :param potential: pair potential generating the field.
    """

    values: FloatArray
    legendre_moments: Mapping[int, float]
    potential: AxisymmetricPotential

    def at(self, u: ArrayLike) -> FloatArray:
        """
        Evaluate the Legendre expansion of H_nu at arbitrary cosines.

        :param u: polar cosines.
        :return: values of H_nu.
        """
        x = np.asarray(u, dtype=np.float64)
        table = legendre_table(self.potential.max_degree, x)
        total = np.zeros_like(x)
        for degree, moment in self.legendre_moments.items():
            total = total + self.potential.coefficient(degree) * moment * table[degree]
        return total

    def has_unique_minimum(self, points: int = 2001, tol: float = 1e-12) -> bool:
        """
        Numerical check that H_nu has a single strict minimum on [0, 1].

        :param points: dense grid size.
        :param tol: plateau tolerance.
        :return: True when exactly one grid point is a strict local minimum.
        """
        values = self.at(np.linspace(0.0, 1.0, points))
        if np.ptp(values) <= tol:
            return False
        padded = np.concatenate(([np.inf], values, [np.inf]))
        interior = padded[1:-1]
        minima = (interior < padded[:-2] - tol) & (interior < padded[2:] - tol)
        return int(np.count_nonzero(minima)) == 1


def effective_potential(U: AxisymmetricPotential, nu: "OrientationDensity") -> EffectivePotential:
    """
    H_nu(m) = integral of U(m, m') nu(m') over the half-sphere, for axisymmetric nu.

    By the addition theorem the azimuthal integral of P_l(m . m') is
    2*pi P_l(u) P_l(u'), so H_nu(u) = sum_l c_l <P_l>_nu P_l(u) with
    <P_l>_nu = 2*pi * integral_0^1 P_l nu du and <P_0>_nu = 1 exactly.

    :param U: pair potential.
    :param nu: orientation density.
    :raises InvalidArgumentError: if nu is not normalized.
    :return: effective potential at the density's nodes.
    """
    rule = nu.rule
    mass = 2.0 * math.pi * rule.integrate(nu.values)
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise InvalidArgumentError(f"density is not normalized: mass {mass!r}")
    table = legendre_table(U.max_degree, rule.nodes)
    moments: dict[int, float] = {0: 1.0}
    values = np.full(rule.order, U.coefficient(0))
    for degree in U.coeffs:
        if degree == 0:
            continue
        moment = 2.0 * math.pi * rule.integrate(table[degree] * nu.values)
        moments[degree] = moment
        values = values + U.coefficient(degree) * moment * table[degree]
    return EffectivePotential(
        values=values,
        legendre_moments=MappingProxyType(moments),
        potential=U,
    )


class MaierSaupeSpec(BaseModel):
    """JSON form of the Maier-Saupe potential."""

    type: Literal["maier-saupe"] = "maier-saupe"
    w: float = Field(1.0, gt=0, description="Coupling constant")

    def build(self) -> AxisymmetricPotential:
        """Construct the potential."""
        return maier_saupe(self.w)


class LegendreSpec(BaseModel):
    """JSON form of a general even Legendre series."""

    type: Literal["legendre"] = "legendre"
    coeffs: dict[int, float] = Field(..., description="Coefficients keyed by even degree")

    def build(self) -> AxisymmetricPotential:
        """Construct the potential."""
        return legendre_potential(self.coeffs)


PotentialSpec = Annotated[Union[MaierSaupeSpec, LegendreSpec], Field(discriminator="type")]

_potential_spec_adapter: TypeAdapter[Union[MaierSaupeSpec, LegendreSpec]] = TypeAdapter(PotentialSpec)


def potential_from_spec(spec: Union[Mapping[str, Any], MaierSaupeSpec, LegendreSpec]) -> AxisymmetricPotential:
    """
    Build a potential from its JSON object form.

    :param spec: {"type": "maier-saupe", "w": 1.0} or
        {"type": "legendre", "coeffs": {"0": 1.0, "2": -1.0}}.
    :return: potential.
    """
    if isinstance(spec, (MaierSaupeSpec, LegendreSpec)):
        return spec.build()
    return _potential_spec_adapter.validate_python(spec).build()
