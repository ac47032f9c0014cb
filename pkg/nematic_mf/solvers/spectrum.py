"""
Linearization around the isotropic state.

K is the integral operator with kernel -(1/2 pi) U~(m, m'), U~ = U - c_0.
On the axisymmetric degree-l harmonic it acts as multiplication by
lambda_l = -c~_l / (2l + 1), and isotropic solutions bifurcate where
beta * lambda_l = 1.
"""

import math
from typing import Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel

from nematic_mf.exceptions import InvalidArgumentError
from nematic_mf.solvers.numerics import (
    DEFAULT_ORDER,
    FloatArray,
    QuadratureRule,
    gauss_rule,
    legendre_p,
    legendre_table,
)
from nematic_mf.solvers.potential import AZIMUTH_POINTS, AxisymmetricPotential, azimuthal_average
from nematic_mf.solvers.sce import OrientationDensity, sce_map

# Leading bifurcation temperatures closer than this (relative) are degenerate.
DEGENERACY_TOL = 1e-12
# Discrete eigenvalues below this are the null space of K.
NULL_EIGENVALUE = 1e-10


class SpectrumReport(BaseModel):
    """Spectrum of K with the derived bifurcation data."""

    eigenvalues: dict[int, float]
    norm_k: float
    bifurcation_betas: dict[int, float]
    uniqueness_beta: Optional[float]
    no_bifurcation_beta: Optional[float]
    critical_degree: Optional[int] = None
    beta_star: Optional[float] = None
    degenerate: bool = False
    transcriticality_B: Optional[float] = None  # noqa: N815
    discretization_error: Optional[float] = None


def critical_eigenvector(degree: int, rule: QuadratureRule) -> FloatArray:
    """
    2 P_l(cos theta) at the nodes; 3 cos^2 theta - 1 for l = 2.

    :param degree: even degree >= 2.
    :param rule: quadrature rule.
    :return: eigenvector values, zero mean over the half-sphere.
    """
    if degree < 2:
        raise InvalidArgumentError("critical eigenvectors have degree >= 2")
    return 2.0 * np.asarray(legendre_p(degree, rule.nodes))


def kernel_matrix(
    U: AxisymmetricPotential,
    rule: QuadratureRule,
    azimuth_points: int = AZIMUTH_POINTS,
) -> FloatArray:
    """
    Discretized K acting on values at the nodes.

    Entry (i, j) is -w_j times the azimuthal average of U~(cos gamma_ij),
    evaluated directly from U rather than from its Legendre diagonalization.

    :param U: pair potential.
    :param rule: quadrature rule.
    :param azimuth_points: trapezoidal samples in the azimuth.
    :return: matrix A with (K mu)_i = sum_j A_ij mu_j.
    """
    kernel = azimuthal_average(
        U.deviation(),
        rule.nodes[:, None],
        rule.nodes[None, :],
        points=azimuth_points,
    )
    return -kernel * rule.weights[None, :]


def discretized_eigenvalues(U: AxisymmetricPotential, rule: QuadratureRule) -> FloatArray:
    """
    Eigenvalues of the discretized K, ascending.

    K is self-adjoint for the weighted inner product, so the similar matrix
    W^(1/2) A W^(-1/2) is symmetric and goes to a dense symmetric solver.

    :param U: pair potential.
    :param rule: quadrature rule.
    :return: eigenvalues.
    """
    root = np.sqrt(rule.weights)
    symmetric = root[:, None] * kernel_matrix(U, rule) / root[None, :]
    return np.linalg.eigvalsh(0.5 * (symmetric + symmetric.T))


def _discretization_error(eigenvalues: dict[int, float], numeric: FloatArray) -> Optional[float]:
    active = np.sort(numeric[np.abs(numeric) > NULL_EIGENVALUE])
    analytic = np.sort(np.asarray(list(eigenvalues.values()), dtype=np.float64))
    if active.size != analytic.size:
        logger.warning(
            "discretized kernel has {} non-null eigenvalues, expected {}",
            active.size,
            analytic.size,
        )
        return None
    if not analytic.size:
        return 0.0
    return float(np.max(np.abs(active - analytic)))


def field_of(U: AxisymmetricPotential, mu: FloatArray, rule: QuadratureRule) -> FloatArray:
    """
    H_mu(u) = integral of U(m, m') mu(m') over the half-sphere, for axisymmetric mu.

    :param U: pair potential.
    :param mu: perturbation values at the nodes.
    :param rule: quadrature rule.
    :return: H_mu at the nodes.
    """
    table = legendre_table(U.max_degree, rule.nodes)
    values = np.zeros(rule.order)
    for degree, coefficient in U.coeffs.items():
        projection = rule.integrate(table[degree] * mu)
        values = values + 2.0 * math.pi * coefficient * projection * table[degree]
    return values


def transcriticality_coefficient(
    U: AxisymmetricPotential,
    beta_star: float,
    mu_star: FloatArray,
    rule: QuadratureRule,
) -> float:
    """
    B = -beta*^2 |M|^-1 integral of mu* (H_mu*)^2 over the half-sphere.

    B != 0 makes the bifurcation at beta* transcritical.

    :param U: pair potential.
    :param beta_star: bifurcation inverse temperature.
    :param mu_star: critical eigenvector at the nodes.
    :param rule: quadrature rule.
    :return: B.
    """
    field = field_of(U, np.asarray(mu_star, dtype=np.float64), rule)
    # |M|^-1 cancels the 2 pi of the half-sphere integral
    return -(beta_star**2) * rule.integrate(mu_star * field**2)


def second_variation(
    beta: float,
    U: AxisymmetricPotential,
    mu: FloatArray,
    rule: QuadratureRule,
    eps: float = 1e-3,
) -> float:
    """
    <mu, D^2 Phi[mu, mu]> at the isotropic state by central differences.

    Phi(beta, nu) = nu - sce_map(beta, U, nu); the isotropic state is an exact
    zero of Phi, so only the two shifted evaluations are needed.

    :param beta: inverse temperature.
    :param U: pair potential.
    :param mu: zero-mean perturbation at the nodes.
    :param rule: quadrature rule.
    :param eps: difference step; uniform +- eps * mu must stay positive.
    :return: second variation.
    """
    uniform = OrientationDensity.uniform(rule)

    def _phi(sign: float) -> FloatArray:
        shifted = OrientationDensity.from_values(rule, uniform.values + sign * eps * mu)
        return shifted.values - sce_map(beta, U, shifted).values

    curvature = (_phi(1.0) + _phi(-1.0)) / eps**2
    return 2.0 * math.pi * rule.integrate(mu * curvature)


def k_eigenvalues(U: AxisymmetricPotential, rule: Optional[QuadratureRule] = None) -> SpectrumReport:
    """
    Closed-form spectrum of K with bifurcation data and rigorous-regime bounds.

    The matrix eigen-solve of the discretized kernel is run alongside and its
    largest mismatch reported as discretization_error.

    :param U: pair potential.
    :param rule: rule for the eigenvector, B and the discretized check.
    :return: report.
    """
    rule = rule or gauss_rule(DEFAULT_ORDER)
    eigenvalues = {
        degree: -coefficient / (2 * degree + 1)
        for degree, coefficient in U.deviation().coeffs.items()
        if coefficient != 0.0
    }
    norm_k = max((abs(value) for value in eigenvalues.values()), default=0.0)
    bifurcation_betas = {
        degree: 1.0 / value for degree, value in eigenvalues.items() if value > 0.0
    }
    sup_norm = U.sup_norm()
    report = SpectrumReport(
        eigenvalues=eigenvalues,
        norm_k=norm_k,
        bifurcation_betas=bifurcation_betas,
        uniqueness_beta=1.0 / (2.0 * sup_norm) if sup_norm > 0.0 else None,
        no_bifurcation_beta=1.0 / norm_k if norm_k > 0.0 else None,
        discretization_error=_discretization_error(
            eigenvalues,
            discretized_eigenvalues(U, rule),
        ),
    )
    if not bifurcation_betas:
        return report

    critical_degree = min(bifurcation_betas, key=bifurcation_betas.__getitem__)
    beta_star = bifurcation_betas[critical_degree]
    tied = [
        degree
        for degree, beta in bifurcation_betas.items()
        if abs(beta - beta_star) <= DEGENERACY_TOL * beta_star
    ]
    report.beta_star = beta_star
    if len(tied) > 1:
        logger.warning(
            "degrees {} bifurcate together at beta={}; not classifying the bifurcation",
            tied,
            beta_star,
        )
        report.degenerate = True
        return report

    report.critical_degree = critical_degree
    report.transcriticality_B = transcriticality_coefficient(
        U,
        beta_star,
        critical_eigenvector(critical_degree, rule),
        rule,
    )
    return report
