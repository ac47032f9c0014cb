"""
Mean-field free-energy density of homogeneous states.

f_beta(nu) = 1/2 <H_nu>_nu - S(nu) / beta with S(nu) = -integral of nu ln nu
over the half-sphere. Solutions of the self-consistency equation are its
critical points; equilibrium states are its minimizers.
"""

import math
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel
from scipy.optimize import brentq
from scipy.special import xlogy

from nematic_mf.exceptions import InvalidArgumentError
from nematic_mf.solvers.continuation import BranchKind
from nematic_mf.solvers.numerics import QuadratureRule
from nematic_mf.solvers.potential import AxisymmetricPotential, effective_potential, maier_saupe
from nematic_mf.solvers.sce import (
    ISOTROPIC_XI,
    ROOT_MERGE_TOL,
    OrientationDensity,
    ScalarReduction,
    ScalarRoot,
    default_scalar_rule,
    order_parameter,
    sce_map,
    sce_residual,
    seed_density,
)

# Free energies closer than this are reported as degenerate.
DEGENERACY_TOL = 1e-10
# Densities passed for ranking must solve the equation to this sup-norm.
RANKING_RESIDUAL = 1e-8


class FreeEnergyReport(BaseModel):
    """Energy, entropy and free energy of one density."""

    beta: float
    energy: float
    entropy: float
    free_energy: float


class RankedState(BaseModel):
    """A labelled solution with its free energy and rank."""

    label: str
    rank: int
    xi: float
    report: FreeEnergyReport
    degenerate: bool = False


def free_energy(beta: float, U: AxisymmetricPotential, nu: OrientationDensity) -> FreeEnergyReport:
    """
    Evaluate the free-energy density.

    Nodes where nu underflows to zero contribute nothing to the entropy.

    :param beta: inverse temperature, > 0.
    :param U: pair potential.
    :param nu: density.
    :return: report.
    """
    if not math.isfinite(beta) or beta <= 0.0:
        raise InvalidArgumentError(f"inverse temperature must be positive, got {beta!r}")
    rule = nu.rule
    molecular_field = effective_potential(U, nu).values
    energy = 0.5 * 2.0 * math.pi * rule.integrate(nu.values * molecular_field)
    entropy = -2.0 * math.pi * rule.integrate(xlogy(nu.values, nu.values))
    return FreeEnergyReport(
        beta=beta,
        energy=energy,
        entropy=entropy,
        free_energy=energy - entropy / beta,
    )


def density_from_root(
    beta: float,
    U: AxisymmetricPotential,
    xi: float,
    rule: QuadratureRule,
) -> OrientationDensity:
    """
    Solution density belonging to a scalar root.

    The image of any density with order parameter xi under the map is the
    fixed point itself, since H_nu depends on nu only through xi.

    :param beta: inverse temperature.
    :param U: Maier-Saupe potential.
    :param xi: root of the scalar equation.
    :param rule: quadrature rule.
    :return: density.
    """
    return sce_map(beta, U, seed_density(rule, xi))


def root_label(root: ScalarRoot) -> BranchKind:
    """Branch family a scalar root belongs to."""
    if abs(root.xi - ISOTROPIC_XI) <= ROOT_MERGE_TOL:
        return BranchKind.ISOTROPIC
    if root.stable and root.xi < ISOTROPIC_XI:
        return BranchKind.NEMATIC_LOWER
    return BranchKind.NEMATIC_UPPER


def rank_branches(
    beta: float,
    U: AxisymmetricPotential,
    states: Sequence[tuple[str, OrientationDensity]],
) -> list[RankedState]:
    """
    Order solutions by free energy, lowest first.

    States whose free energy lies within DEGENERACY_TOL of a neighbour in the
    ordering are flagged degenerate.

    :param beta: inverse temperature.
    :param U: pair potential.
    :param states: labelled densities solving the equation at beta.
    :raises InvalidArgumentError: if a density is not a solution.
    :return: ranked states.
    """
    reports = []
    for label, nu in states:
        residual = sce_residual(beta, U, nu)
        if residual > RANKING_RESIDUAL:
            raise InvalidArgumentError(
                f"state {label} does not solve the equation at beta={beta}: residual {residual:.3e}",
            )
        reports.append((label, order_parameter(nu), free_energy(beta, U, nu)))
    reports.sort(key=lambda item: item[2].free_energy)
    ranked = [
        RankedState(label=label, rank=index, xi=xi, report=report)
        for index, (label, xi, report) in enumerate(reports)
    ]
    for first, second in zip(ranked, ranked[1:]):
        if second.report.free_energy - first.report.free_energy <= DEGENERACY_TOL:
            first.degenerate = True
            second.degenerate = True
    return ranked


def scalar_states(
    beta: float,
    reduction: Optional[ScalarReduction] = None,
    tol: float = 1e-10,
) -> list[RankedState]:
    """
    Rank every solution of the scalar Maier-Saupe equation at beta.

    :param beta: inverse temperature.
    :param reduction: scalar reduction, w = 1 by default.
    :param tol: root tolerance.
    :return: ranked states labelled by branch family.
    """
    reduction = reduction or ScalarReduction(default_scalar_rule())
    U = maier_saupe(reduction.w)
    states = [
        (root_label(root).value, density_from_root(beta, U, root.xi, reduction.rule))
        for root in reduction.solve(beta, tol=tol)
    ]
    return rank_branches(beta, U, states)


def _nematic_gap(beta: float, reduction: ScalarReduction, tol: float) -> float:
    roots = reduction.solve(beta, tol=tol)
    lower = [root for root in roots if root_label(root) is BranchKind.NEMATIC_LOWER]
    if not lower:
        raise InvalidArgumentError(f"no stable nematic solution at beta={beta}")
    U = maier_saupe(reduction.w)
    rule = reduction.rule
    nematic = free_energy(beta, U, density_from_root(beta, U, lower[0].xi, rule))
    isotropic = free_energy(beta, U, OrientationDensity.uniform(rule))
    return nematic.free_energy - isotropic.free_energy


def transition_beta(
    beta_lo: float,
    beta_hi: float,
    reduction: Optional[ScalarReduction] = None,
    tol: float = 1e-10,
) -> float:
    """
    First-order transition where the stable nematic and isotropic free energies cross.

    About 4.5415 / w for Maier-Saupe, between the saddle-node and beta*.

    :param beta_lo: lower bracket, above the saddle-node.
    :param beta_hi: upper bracket.
    :param reduction: scalar reduction, w = 1 by default.
    :param tol: bracket tolerance in beta.
    :raises InvalidArgumentError: if the bracket does not contain a crossing.
    :return: transition inverse temperature.
    """
    reduction = reduction or ScalarReduction(default_scalar_rule())
    low_gap = _nematic_gap(beta_lo, reduction, tol)
    high_gap = _nematic_gap(beta_hi, reduction, tol)
    if low_gap * high_gap > 0.0:
        raise InvalidArgumentError(
            f"free energies do not cross on [{beta_lo}, {beta_hi}]",
        )
    beta = brentq(_nematic_gap, beta_lo, beta_hi, args=(reduction, tol), xtol=tol)
    logger.info("nematic-isotropic transition at beta={:.9f}", beta)
    return float(beta)


def first_variation_check(
    beta: float,
    U: AxisymmetricPotential,
    nu: OrientationDensity,
    rng: np.random.Generator,
    n_perturbations: int = 20,
    eps: float = 1e-4,
) -> float:
    """
    Largest |f(nu + eps eta) - f(nu)| / eps^2 over random perturbations.

    eta = nu (g - <g>_nu) with g random at the nodes and scaled to unit sup
    norm, so nu + eps eta stays positive and keeps its mass. Bounded output
    means the first variation vanishes at nu.

    :param beta: inverse temperature.
    :param U: pair potential.
    :param nu: candidate critical point.
    :param rng: random generator.
    :param n_perturbations: number of directions tried.
    :param eps: perturbation size, < 1.
    :return: largest scaled change.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidArgumentError("eps must lie in (0, 1)")
    rule = nu.rule
    base = free_energy(beta, U, nu).free_energy
    worst = 0.0
    for _ in range(n_perturbations):
        g = rng.standard_normal(rule.order)
        g = g - 2.0 * math.pi * rule.integrate(nu.values * g)
        g = g / np.max(np.abs(g))
        perturbed = OrientationDensity.from_values(rule, nu.values * (1.0 + eps * g))
        change = abs(free_energy(beta, U, perturbed).free_energy - base)
        worst = max(worst, change / eps**2)
    return worst
