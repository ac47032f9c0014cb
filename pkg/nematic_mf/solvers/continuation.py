"""
Branches xi(beta) of the scalar self-consistency equation.

Roots are collected on a beta grid, linked into branches by nearest-xi
matching, and bifurcations between grid points are refined by bisection:
the saddle-node on the existence of the nematic pair, the transcritical
point on the sign of 1 - dF/dxi at the isotropic state.
"""

import enum
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Iterator, Optional, TypeVar

import numpy as np
from loguru import logger
from pydantic import BaseModel
from scipy.optimize import brentq, minimize_scalar

from nematic_mf.exceptions import InvalidArgumentError, InvariantViolationError, SolverError
from nematic_mf.solvers.sce import ISOTROPIC_XI, ScalarReduction, ScalarRoot, default_scalar_rule

T = TypeVar("T")
R = TypeVar("R")
MapFn = Callable[[Callable[[T], R], Iterable[T]], Iterable[R]]

# |G| bound every branch point must satisfy.
BRANCH_RESIDUAL_LIMIT = 1e-9
# Roots closer than this in xi cannot be told apart by position alone.
LINK_AMBIGUITY = 1e-6
# Grid steps a branch may go unmatched before it is closed.
LINK_GRACE = 2
# Distance below 2/3 excluded from the fold search.
FOLD_MARGIN = 1e-3


class BranchKind(str, enum.Enum):
    """Solution branch families."""

    ISOTROPIC = "isotropic"
    NEMATIC_LOWER = "nematic-lower"
    NEMATIC_UPPER = "nematic-upper"


class EventKind(str, enum.Enum):
    """Bifurcation types."""

    SADDLE_NODE = "saddle-node"
    TRANSCRITICAL = "transcritical"


@dataclass(frozen=True)
class BranchPoint:
    """One solution on a branch."""

    beta: float
    xi: float
    dF_dxi: float  # noqa: N815
    stable: bool
    residual: float


@dataclass
class Branch:
    """Ordered solutions forming one branch."""

    kind: BranchKind
    points: list[BranchPoint] = field(default_factory=list)

    @property
    def betas(self) -> np.ndarray:
        """Inverse temperatures along the branch."""
        return np.array([point.beta for point in self.points])

    @property
    def xis(self) -> np.ndarray:
        """Order parameters along the branch."""
        return np.array([point.xi for point in self.points])

    def scaled_order(self) -> np.ndarray:
        """beta * xi along the branch, tending to 2 / (3 w) at low temperature."""
        return self.betas * self.xis

    def max_residual(self) -> float:
        """Largest |G| on the branch."""
        return max((point.residual for point in self.points), default=0.0)


class BifurcationEvent(BaseModel):
    """A refined bifurcation point."""

    kind: EventKind
    beta: float
    xi: float
    refinement_error: float
    branch_slope: Optional[float] = None


@dataclass(frozen=True)
class GridScan:
    """Everything computed at one grid temperature."""

    beta: float
    roots: tuple[ScalarRoot, ...]
    iso_slope: float
    fold_gap: float

    @property
    def nematic_roots(self) -> tuple[ScalarRoot, ...]:
        """Roots other than the isotropic one."""
        return tuple(root for root in self.roots if root.xi != ISOTROPIC_XI)


@dataclass
class PhaseDiagram:
    """Branches, events and raw scans of a beta sweep."""

    branches: list[Branch]
    events: list[BifurcationEvent]
    scans: list[GridScan]

    def check_residuals(self, limit: float = BRANCH_RESIDUAL_LIMIT) -> None:
        """
        Enforce |G| <= limit on every branch point.

        :param limit: residual bound.
        :raises InvariantViolationError: on the first offending branch.
        """
        for branch in self.branches:
            worst = branch.max_residual()
            if worst > limit:
                raise InvariantViolationError(
                    f"{branch.kind.value} branch has residual {worst:.3e} > {limit:.1e}",
                )


def fold_gap(reduction: ScalarReduction, beta: float) -> float:
    """
    Minimum of the deflated residual on [0, 2/3 - FOLD_MARGIN].

    Negative exactly when a pair of nematic roots exists below 2/3 or a root
    has crossed above it; zero at the saddle-node.

    :param reduction: scalar reduction.
    :param beta: inverse temperature.
    :return: minimum value.
    """
    upper = ISOTROPIC_XI - FOLD_MARGIN
    grid = np.linspace(0.0, upper, 400)
    values = reduction.deflated(beta, grid)
    index = int(np.argmin(values))
    lower_bound = grid[max(index - 1, 0)]
    upper_bound = grid[min(index + 1, grid.size - 1)]
    result = minimize_scalar(
        lambda x: float(reduction.deflated(beta, x)[0]),
        bounds=(lower_bound, upper_bound),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(values[index], result.fun))


def fold_location(reduction: ScalarReduction, beta: float) -> float:
    """
    xi at which the deflated residual is smallest below 2/3.

    :param reduction: scalar reduction.
    :param beta: inverse temperature.
    :return: location of the double root near the saddle-node.
    """
    upper = ISOTROPIC_XI - FOLD_MARGIN
    grid = np.linspace(0.0, upper, 400)
    index = int(np.argmin(reduction.deflated(beta, grid)))
    result = minimize_scalar(
        lambda x: float(reduction.deflated(beta, x)[0]),
        bounds=(grid[max(index - 1, 0)], grid[min(index + 1, grid.size - 1)]),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(result.x)


def isotropic_margin(reduction: ScalarReduction, beta: float) -> float:
    """1 - dF/dxi at the isotropic state; changes sign at the transcritical point."""
    return 1.0 - float(reduction.df_dxi(beta, ISOTROPIC_XI))


def scan_beta(reduction: ScalarReduction, beta: float, tol: float = 1e-10) -> GridScan:
    """
    Roots and bifurcation indicators at one temperature.

    :param reduction: scalar reduction.
    :param beta: inverse temperature.
    :param tol: root tolerance.
    :return: scan record.
    """
    return GridScan(
        beta=float(beta),
        roots=tuple(reduction.solve(float(beta), tol=tol)),
        iso_slope=float(reduction.df_dxi(float(beta), ISOTROPIC_XI)),
        fold_gap=fold_gap(reduction, float(beta)),
    )


def _bisect(indicator: Callable[[float], float], lo: float, hi: float, width: float) -> tuple[float, float]:
    lo_sign = math.copysign(1.0, indicator(lo))
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if math.copysign(1.0, indicator(mid)) == lo_sign:
            lo = mid
        else:
            hi = mid
    return lo, hi


def crossing_branch_slope(reduction: ScalarReduction, beta_star: float, delta: float = 1e-2) -> Optional[float]:
    """
    d xi / d beta of the branch crossing 2/3 at beta_star.

    :param reduction: scalar reduction.
    :param beta_star: transcritical point.
    :param delta: half-width of the central difference.
    :return: slope, or None if the branch is not found on both sides.
    """
    crossing = []
    for beta in (beta_star - delta, beta_star + delta):
        candidates = [
            root.xi
            for root in reduction.solve(beta)
            if root.xi != ISOTROPIC_XI and abs(root.xi - ISOTROPIC_XI) < 0.2
        ]
        if not candidates:
            return None
        crossing.append(min(candidates, key=lambda xi: abs(xi - ISOTROPIC_XI)))
    return (crossing[1] - crossing[0]) / (2.0 * delta)


def refine_saddle_node(
    reduction: ScalarReduction,
    lo: float,
    hi: float,
    width: float = 1e-6,
) -> BifurcationEvent:
    """
    Bisect on the existence of the nematic pair between lo and hi.

    :param reduction: scalar reduction.
    :param lo: grid temperature on one side.
    :param hi: grid temperature on the other side.
    :param width: final bracket width in beta.
    :return: saddle-node event.
    """
    lo, hi = _bisect(partial(fold_gap, reduction), lo, hi, width)
    beta = 0.5 * (lo + hi)
    event = BifurcationEvent(
        kind=EventKind.SADDLE_NODE,
        beta=beta,
        xi=fold_location(reduction, beta),
        refinement_error=hi - lo,
    )
    logger.info("saddle-node at beta={:.9f}, xi={:.6f}", event.beta, event.xi)
    return event


def refine_transcritical(
    reduction: ScalarReduction,
    lo: float,
    hi: float,
    width: float = 1e-6,
) -> BifurcationEvent:
    """
    Bisect on the sign of 1 - dF/dxi(beta, 2/3) between lo and hi.

    :param reduction: scalar reduction.
    :param lo: grid temperature on one side.
    :param hi: grid temperature on the other side.
    :param width: final bracket width in beta.
    :return: transcritical event with the slope of the crossing branch.
    """
    lo, hi = _bisect(partial(isotropic_margin, reduction), lo, hi, width)
    beta = 0.5 * (lo + hi)
    event = BifurcationEvent(
        kind=EventKind.TRANSCRITICAL,
        beta=beta,
        xi=ISOTROPIC_XI,
        refinement_error=hi - lo,
        branch_slope=crossing_branch_slope(reduction, beta),
    )
    logger.info("transcritical at beta={:.9f}, slope={}", event.beta, event.branch_slope)
    return event


def _detect_events(
    reduction: ScalarReduction,
    scans: list[GridScan],
    width: float,
) -> list[BifurcationEvent]:
    events = []
    for prev, cur in zip(scans, scans[1:]):
        if (1.0 - prev.iso_slope) * (1.0 - cur.iso_slope) < 0.0:
            events.append(refine_transcritical(reduction, prev.beta, cur.beta, width))
        if prev.fold_gap * cur.fold_gap < 0.0:
            events.append(refine_saddle_node(reduction, prev.beta, cur.beta, width))
    return sorted(events, key=lambda event: event.beta)


@dataclass
class _OpenBranch:
    points: list[BranchPoint]
    missed: int = 0


def _to_point(beta: float, root: ScalarRoot) -> BranchPoint:
    return BranchPoint(
        beta=beta,
        xi=root.xi,
        dF_dxi=root.dF_dxi,
        stable=root.stable,
        residual=root.residual,
    )


def _pairs_by_distance(
    open_branches: list[_OpenBranch],
    roots: tuple[ScalarRoot, ...],
) -> Iterator[tuple[int, int]]:
    distances = sorted(
        (abs(branch.points[-1].xi - root.xi), b, r)
        for b, branch in enumerate(open_branches)
        for r, root in enumerate(roots)
    )
    for _, b, r in distances:
        yield b, r


def _ambiguous(roots: tuple[ScalarRoot, ...]) -> bool:
    xis = sorted(root.xi for root in roots)
    return any(b - a < LINK_AMBIGUITY for a, b in zip(xis, xis[1:]))


def _link(scans: list[GridScan]) -> list[list[BranchPoint]]:
    open_branches: list[_OpenBranch] = []
    closed: list[list[BranchPoint]] = []
    for scan in scans:
        roots = scan.nematic_roots
        by_stability = _ambiguous(roots)
        if by_stability:
            logger.warning(
                "nematic roots closer than {} at beta={}; linking by stability",
                LINK_AMBIGUITY,
                scan.beta,
            )
        taken_branches: set[int] = set()
        taken_roots: set[int] = set()
        for b, r in _pairs_by_distance(open_branches, roots):
            if b in taken_branches or r in taken_roots:
                continue
            if by_stability and open_branches[b].points[-1].stable != roots[r].stable:
                continue
            open_branches[b].points.append(_to_point(scan.beta, roots[r]))
            open_branches[b].missed = 0
            taken_branches.add(b)
            taken_roots.add(r)
        for b, branch in enumerate(open_branches):
            if b not in taken_branches:
                branch.missed += 1
        still_open = []
        for branch in open_branches:
            if branch.missed > LINK_GRACE:
                closed.append(branch.points)
            else:
                still_open.append(branch)
        open_branches = still_open
        for r, root in enumerate(roots):
            if r not in taken_roots:
                open_branches.append(_OpenBranch(points=[_to_point(scan.beta, root)]))
    closed.extend(branch.points for branch in open_branches)
    return closed


def _classify(points: list[BranchPoint]) -> BranchKind:
    stable = sum(point.stable for point in points)
    if 2 * stable > len(points):
        return BranchKind.NEMATIC_LOWER
    return BranchKind.NEMATIC_UPPER


def trace_branches(
    beta_min: float,
    beta_max: float,
    beta_steps: int,
    tol: float = 1e-10,
    reduction: Optional[ScalarReduction] = None,
    map_fn: Optional[MapFn] = None,
    event_width: float = 1e-6,
) -> PhaseDiagram:
    """
    Solution branches and bifurcation events on an evenly spaced beta grid.

    Grid scans are independent and go through `map_fn` (a pool's ordered map
    or the builtin map); linking and event detection run over the ordered
    results.

    :param beta_min: first grid temperature, > 0.
    :param beta_max: last grid temperature, > beta_min.
    :param beta_steps: number of grid points, >= 2.
    :param tol: root tolerance.
    :param reduction: scalar reduction, Maier-Saupe w = 1 by default.
    :param map_fn: ordered map used for the scans.
    :param event_width: bisection bracket width for events.
    :raises InvalidArgumentError: for an empty or non-positive range.
    :return: phase diagram.
    """
    if not 0.0 < beta_min < beta_max or beta_steps < 2:
        raise InvalidArgumentError(
            f"empty beta range [{beta_min}, {beta_max}] with {beta_steps} steps",
        )
    reduction = reduction or ScalarReduction(default_scalar_rule())
    mapper: MapFn = map_fn or map
    betas = np.linspace(beta_min, beta_max, beta_steps)
    scans = list(mapper(partial(scan_beta, reduction, tol=tol), [float(b) for b in betas]))

    isotropic = Branch(kind=BranchKind.ISOTROPIC)
    for scan in scans:
        iso_root = next(root for root in scan.roots if root.xi == ISOTROPIC_XI)
        isotropic.points.append(_to_point(scan.beta, iso_root))
    nematic = [Branch(kind=_classify(points), points=points) for points in _link(scans)]
    events = _detect_events(reduction, scans, event_width)
    logger.info(
        "traced {} branches and {} events on beta in [{}, {}]",
        1 + len(nematic),
        len(events),
        beta_min,
        beta_max,
    )
    return PhaseDiagram(branches=[isotropic, *nematic], events=events, scans=scans)


def _lower_root(reduction: ScalarReduction, beta: float, tol: float) -> ScalarRoot:
    candidates = [
        root for root in reduction.solve(beta, tol=tol) if root.xi < ISOTROPIC_XI and root.stable
    ]
    if not candidates:
        raise SolverError(f"no stable nematic root below 2/3 at beta={beta}")
    return min(candidates, key=lambda root: root.xi)


def low_temperature_branch(
    beta_start: float,
    beta_end: float,
    steps: int,
    tol: float = 1e-10,
    reduction: Optional[ScalarReduction] = None,
) -> Branch:
    """
    Follow the stable nematic branch on a geometric beta grid.

    Each solve is bracketed by [0, previous xi]: G(beta, 0) < 0 always, and
    G(beta, xi_prev) > 0 while the branch keeps decreasing.

    :param beta_start: first temperature, >= 10.
    :param beta_end: last temperature.
    :param steps: number of grid points, >= 2.
    :param tol: root tolerance relative to the current xi.
    :param reduction: scalar reduction, Maier-Saupe w = 1 by default.
    :raises SolverError: if the nematic root is lost.
    :raises InvariantViolationError: if xi fails to decrease.
    :return: nematic-lower branch.
    """
    if beta_start < 10.0 or beta_end <= beta_start or steps < 2:
        raise InvalidArgumentError(
            "low-temperature tracing needs 10 <= beta_start < beta_end and steps >= 2",
        )
    reduction = reduction or ScalarReduction(default_scalar_rule())
    betas = np.geomspace(beta_start, beta_end, steps)
    first = _lower_root(reduction, float(betas[0]), tol)
    branch = Branch(kind=BranchKind.NEMATIC_LOWER, points=[_to_point(float(betas[0]), first)])
    for beta in (float(b) for b in betas[1:]):
        previous = branch.points[-1].xi
        if float(reduction.g(beta, previous)) <= 0.0:
            root = _lower_root(reduction, beta, tol)
        else:
            xi = brentq(
                lambda x, b=beta: float(reduction.g(b, x)),
                0.0,
                previous,
                xtol=tol * min(1.0, previous),
                rtol=4 * np.finfo(float).eps,
            )
            root = reduction.make_root(beta, xi)
        if root.xi >= previous:
            raise InvariantViolationError(
                f"order parameter did not decrease at beta={beta}: {root.xi} >= {previous}",
            )
        branch.points.append(_to_point(beta, root))
    logger.info(
        "low-temperature branch: beta*xi = {:.6f} at beta={:g}",
        branch.scaled_order()[-1],
        branch.points[-1].beta,
    )
    return branch
