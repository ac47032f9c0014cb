"""
Large-beta expansions of Boltzmann-weighted integrals on [0, pi/2].

For f with a unique minimum at theta = 0 and f''(0) > 0,

    Z(beta) = integral of exp(-beta f) sin(theta)
    <g>     = integral of g exp(-beta f) sin(theta) / Z(beta)

are expanded in powers of beta^(-1/2) using only derivatives at 0. The
numeric oracles integrate in theta on a rule graded toward theta = 0.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from nematic_mf.exceptions import InvalidArgumentError, NumericalDomainError
from nematic_mf.solvers.numerics import (
    DEFAULT_LEVELS,
    DEFAULT_ORDER,
    FloatArray,
    graded_rule,
    theta_rule,
)

# Central difference steps for the jet at 0.
JET_STEP = 1e-4
JET_STEP_THIRD = 5e-3
# First derivatives below this count as zero; difference jets carry round-off.
JET_D1_TOL = 1e-8

ThetaFunction = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class LocalData:
    """
    Derivatives at the minimum consumed by the expansions.

    :param f0: f(0).
    :param f2: f''(0), strictly positive.
    :param f3: f'''(0).
    :param g0: g(0).
    :param g1: g'(0).
    :param g2: g''(0).
    """

    f0: float
    f2: float
    f3: float
    g0: float = 0.0
    g1: float = 0.0
    g2: float = 0.0

    def __post_init__(self) -> None:
        if not self.f2 > 0.0:
            raise InvalidArgumentError(
                f"f''(0) must be positive for a nondegenerate minimum, got {self.f2!r}",
            )


@dataclass(frozen=True)
class AngularFunction:
    """A function of theta together with its jet at theta = 0."""

    label: str
    func: ThetaFunction
    value: float
    d1: float
    d2: float
    d3: float

    def __call__(self, theta: FloatArray) -> FloatArray:
        return np.asarray(self.func(theta), dtype=np.float64)

    @classmethod
    def from_callable(
        cls,
        func: ThetaFunction,
        label: str = "custom",
        step: float = JET_STEP,
        step_third: float = JET_STEP_THIRD,
    ) -> "AngularFunction":
        """
        Jet by fourth-order central differences.

        func must extend smoothly to small negative theta.

        :param func: vectorized function of theta.
        :param label: name.
        :param step: step for the first and second derivatives.
        :param step_third: step for the third derivative.
        :return: angular function.
        """
        h = step
        f = np.asarray(func(np.array([-2 * h, -h, 0.0, h, 2 * h])), dtype=np.float64)
        d1 = (-f[4] + 8 * f[3] - 8 * f[1] + f[0]) / (12 * h)
        d2 = (-f[4] + 16 * f[3] - 30 * f[2] + 16 * f[1] - f[0]) / (12 * h * h)
        k = step_third
        t = np.asarray(
            func(np.array([-3 * k, -2 * k, -k, k, 2 * k, 3 * k])),
            dtype=np.float64,
        )
        d3 = (-t[5] + 8 * t[4] - 13 * t[3] + 13 * t[2] - 8 * t[1] + t[0]) / (8 * k**3)
        return cls(
            label=label,
            func=func,
            value=float(f[2]),
            d1=float(d1),
            d2=float(d2),
            d3=float(d3),
        )


def _sin2(theta: FloatArray) -> FloatArray:
    return np.sin(theta) ** 2


def _ms(theta: FloatArray) -> FloatArray:
    return 1.5 * np.sin(theta) ** 2


def _theta(theta: FloatArray) -> FloatArray:
    return np.asarray(theta, dtype=np.float64)


def _cubic(theta: FloatArray) -> FloatArray:
    return theta**2 / 2.0 + theta**3 / 6.0


NAMED_FUNCTIONS: dict[str, AngularFunction] = {
    "sin2": AngularFunction("sin2", _sin2, 0.0, 0.0, 2.0, 0.0),
    "sin": AngularFunction("sin", np.sin, 0.0, 1.0, 0.0, -1.0),
    "cos": AngularFunction("cos", np.cos, 1.0, 0.0, -1.0, 0.0),
    "theta": AngularFunction("theta", _theta, 0.0, 1.0, 0.0, 0.0),
    # Maier-Saupe exponent at perfect order, w = 1
    "ms": AngularFunction("ms", _ms, 0.0, 0.0, 3.0, 0.0),
    "cubic": AngularFunction("cubic", _cubic, 0.0, 0.0, 1.0, 1.0),
}


def named_function(name: str) -> AngularFunction:
    """
    Look up a function with an exact jet.

    :param name: one of NAMED_FUNCTIONS.
    :raises InvalidArgumentError: for unknown names.
    :return: angular function.
    """
    try:
        return NAMED_FUNCTIONS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown function {name!r}, expected one of {sorted(NAMED_FUNCTIONS)}",
        ) from None


def local_data(f: AngularFunction, g: Optional[AngularFunction] = None) -> LocalData:
    """Pack the jets of f and g into LocalData."""
    if g is None:
        return LocalData(f0=f.value, f2=f.d2, f3=f.d3)
    return LocalData(f0=f.value, f2=f.d2, f3=f.d3, g0=g.value, g1=g.d1, g2=g.d2)


def _check_beta(beta: float) -> None:
    if not math.isfinite(beta) or beta <= 0.0:
        raise InvalidArgumentError(f"beta must be positive and finite, got {beta!r}")


def laplace_partition(data: LocalData, beta: float) -> float:
    """
    Two-term expansion of the partition integral.

    exp(-beta f0) [1 / (f2 beta) - (1/2) sqrt(pi/2) f3 / f2^(5/2) beta^(-3/2)]

    :param data: local data of f.
    :param beta: inverse temperature.
    :return: expansion value.
    """
    _check_beta(beta)
    leading = 1.0 / (data.f2 * beta)
    correction = 0.5 * math.sqrt(0.5 * math.pi) * data.f3 / data.f2**2.5 * beta**-1.5
    return math.exp(-beta * data.f0) * (leading - correction)


def laplace_expectation(data: LocalData, beta: float) -> float:
    """
    Three-term expansion of the tilted expectation of g.

    g0 + sqrt(pi/2) g1 / sqrt(f2) beta^(-1/2)
       + [g2 / f2 + (3 pi - 16) / 12 g1 f3 / f2^2] beta^(-1)

    :param data: local data of f and g.
    :param beta: inverse temperature.
    :return: expansion value.
    """
    _check_beta(beta)
    half = math.sqrt(0.5 * math.pi) * data.g1 / math.sqrt(data.f2)
    first = data.g2 / data.f2 + (3.0 * math.pi - 16.0) / 12.0 * data.g1 * data.f3 / data.f2**2
    return data.g0 + half / math.sqrt(beta) + first / beta


def _oracle_rule(order: int, levels: int) -> tuple[FloatArray, FloatArray]:
    return theta_rule(graded_rule(order, levels))


def _weights(f: ThetaFunction, beta: float, order: int, levels: int) -> tuple[FloatArray, FloatArray]:
    theta, weights = _oracle_rule(order, levels)
    exponent = np.asarray(f(theta), dtype=np.float64)
    if not np.all(np.isfinite(exponent)):
        raise NumericalDomainError("exponent is not finite at a quadrature node")
    boltzmann = np.exp(-beta * (exponent - np.min(exponent)))
    return theta, weights * boltzmann * np.sin(theta)


def tilted_partition(
    f: ThetaFunction,
    beta: float,
    order: int = DEFAULT_ORDER,
    levels: int = DEFAULT_LEVELS,
) -> float:
    """
    Quadrature of the integral of exp(-beta f) sin(theta) over [0, pi/2].

    :param f: exponent.
    :param beta: inverse temperature.
    :param order: Gauss nodes per panel.
    :param levels: graded panels toward theta = 0.
    :return: integral.
    """
    _check_beta(beta)
    theta, weights = _weights(f, beta, order, levels)
    shift = float(np.min(np.asarray(f(theta), dtype=np.float64)))
    return math.exp(-beta * shift) * float(np.sum(weights))


def tilted_expectation(
    f: ThetaFunction,
    g: ThetaFunction,
    beta: float,
    order: int = DEFAULT_ORDER,
    levels: int = DEFAULT_LEVELS,
) -> float:
    """
    Quadrature of <g> under exp(-beta f) sin(theta) on [0, pi/2].

    :param f: exponent.
    :param g: observable.
    :param beta: inverse temperature.
    :param order: Gauss nodes per panel.
    :param levels: graded panels toward theta = 0.
    :return: expectation.
    """
    _check_beta(beta)
    theta, weights = _weights(f, beta, order, levels)
    return float(np.dot(weights, g(theta)) / np.sum(weights))


def tilted_covariance(
    f: ThetaFunction,
    g: ThetaFunction,
    h: ThetaFunction,
    beta: float,
    order: int = DEFAULT_ORDER,
    levels: int = DEFAULT_LEVELS,
) -> float:
    """
    <g h> - <g><h>, computed as <(g - <g>)(h - <h>)>.

    :param f: exponent.
    :param g: first observable.
    :param h: second observable.
    :param beta: inverse temperature.
    :param order: Gauss nodes per panel.
    :param levels: graded panels toward theta = 0.
    :return: covariance.
    """
    _check_beta(beta)
    theta, weights = _weights(f, beta, order, levels)
    probability = weights / np.sum(weights)
    g_values = np.asarray(g(theta), dtype=np.float64)
    h_values = np.asarray(h(theta), dtype=np.float64)
    g_centered = g_values - np.dot(probability, g_values)
    h_centered = h_values - np.dot(probability, h_values)
    return float(np.dot(probability, g_centered * h_centered))


def _decreasing(values: Sequence[float]) -> bool:
    magnitudes = [abs(value) for value in values]
    return all(b < a for a, b in zip(magnitudes, magnitudes[1:]))


class CumulantDiagnostics(BaseModel):
    """Scaled covariances of two observables along a beta sequence."""

    g: str
    h: str
    f: str
    betas: list[float]
    covariances: list[float]
    half_scaled: list[float]
    full_scaled: list[float]
    half_decreasing: bool
    full_decreasing: Optional[bool]
    passed: bool


def cumulant_decay_check(
    g: AngularFunction,
    h: AngularFunction,
    f: AngularFunction,
    betas: Sequence[float],
) -> CumulantDiagnostics:
    """
    Decay of beta^(1/2) cov(g, h), and of beta cov(g, h) when h'(0) = 0.

    h'(0) counts as zero within JET_D1_TOL, so jets from from_callable
    qualify.

    Only the last three betas enter the monotonicity verdicts.

    :param g: first observable.
    :param h: second observable.
    :param f: exponent.
    :param betas: increasing inverse temperatures, at least three.
    :return: diagnostics.
    """
    values = [float(beta) for beta in betas]
    if len(values) < 3 or any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidArgumentError("betas must be increasing with at least three entries")
    covariances = [tilted_covariance(f, g, h, beta) for beta in values]
    half = [math.sqrt(beta) * cov for beta, cov in zip(values, covariances)]
    full = [beta * cov for beta, cov in zip(values, covariances)]
    half_decreasing = _decreasing(half[-3:])
    full_decreasing = _decreasing(full[-3:]) if abs(h.d1) <= JET_D1_TOL else None
    return CumulantDiagnostics(
        g=g.label,
        h=h.label,
        f=f.label,
        betas=values,
        covariances=covariances,
        half_scaled=half,
        full_scaled=full,
        half_decreasing=half_decreasing,
        full_decreasing=full_decreasing,
        passed=half_decreasing and full_decreasing is not False,
    )


class RateDiagnostics(BaseModel):
    """Truncation errors of the expectation expansion along a beta sequence."""

    g: str
    f: str
    betas: list[float]
    numeric: list[float]
    expansion: list[float]
    errors: list[float]
    ratios: list[float]
    scaled_errors: list[float]


def expansion_rate_check(
    f: AngularFunction,
    g: AngularFunction,
    betas: Sequence[float],
) -> RateDiagnostics:
    """
    Compare laplace_expectation with quadrature along increasing betas.

    ratios[i] = errors[i] / errors[i + 1]; scaled_errors = beta * error,
    which decreases when the remainder is o(1 / beta).

    :param f: exponent.
    :param g: observable.
    :param betas: increasing inverse temperatures, at least two.
    :return: diagnostics.
    """
    values = [float(beta) for beta in betas]
    if len(values) < 2 or any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidArgumentError("betas must be increasing with at least two entries")
    data = local_data(f, g)
    numeric = [tilted_expectation(f, g, beta) for beta in values]
    expansion = [laplace_expectation(data, beta) for beta in values]
    errors = [abs(a - b) for a, b in zip(numeric, expansion)]
    ratios = [a / b if b > 0.0 else math.inf for a, b in zip(errors, errors[1:])]
    return RateDiagnostics(
        g=g.label,
        f=f.label,
        betas=values,
        numeric=numeric,
        expansion=expansion,
        errors=errors,
        ratios=ratios,
        scaled_errors=[beta * error for beta, error in zip(values, errors)],
    )
