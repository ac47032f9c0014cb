"""
Metropolis sampler of N rods with mean-field scaled pair interactions.

V_N = (N - 1)^-1 sum over pairs i < j of U(m_i . m_j). Orientations live on
the half-sphere as (u, phi), u = cos(theta); the uniform measure there is
du dphi, so a symmetric random walk in (u, phi) with reflection at the
u-boundaries and wraparound in phi is a valid Metropolis proposal.

The sweep kernels are compiled by numba. Uniforms are drawn from numpy's
default_rng in blocks and passed in, so runs are bit-reproducible for a
given seed.
"""

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from loguru import logger
from numba import njit
from pydantic import BaseModel

from nematic_mf.exceptions import InvalidArgumentError
from nematic_mf.solvers.numerics import FloatArray
from nematic_mf.solvers.potential import AxisymmetricPotential


TWO_PI = 2.0 * math.pi
# beta * dV above this is always rejected; exp would underflow anyway.
EXPONENT_GUARD = 75.0
TARGET_ACCEPTANCE = 0.5
ACCEPTANCE_WINDOW = (0.2, 0.8)
WIDTH_BOUNDS = (1e-3, 1.0)
TUNE_CHUNK = 20
DEFAULT_BATCHES = 20
# Sokal window constant for the integrated autocorrelation time.
SOKAL_WINDOW = 5.0


@njit(nogil=True)
def _accept(delta: float, zeta: float) -> bool:
    if delta > EXPONENT_GUARD:
        return False
    if delta <= 0.0:
        return True
    return zeta < math.exp(-delta)


@njit(nogil=True)
def _propose(u: float, phi: float, width: float, r_u: float, r_phi: float) -> tuple[float, float]:
    u_new = u + width * (2.0 * r_u - 1.0)
    if u_new < 0.0:
        u_new = -u_new
    if u_new > 1.0:
        u_new = 2.0 - u_new
    phi_new = (phi + math.pi * width * (2.0 * r_phi - 1.0)) % TWO_PI
    if phi_new >= TWO_PI:
        phi_new -= TWO_PI
    return u_new, phi_new


@njit(nogil=True)
def _unit(u: float, phi: float, out: FloatArray) -> None:
    s = math.sqrt(max(0.0, 1.0 - u * u))
    out[0] = s * math.cos(phi)
    out[1] = s * math.sin(phi)
    out[2] = u


@njit(nogil=True)
def _quadratic_form(t: FloatArray, v: FloatArray) -> float:
    total = 0.0
    for a in range(3):
        for b in range(3):
            total += v[a] * t[a, b] * v[b]
    return total


@njit(nogil=True)
def _sweeps_quadrupole(
    u: FloatArray,
    phi: FloatArray,
    c2: float,
    beta: float,
    width: float,
    uniforms: FloatArray,
) -> int:
    # dV only involves sum_j (m . m_j)^2 = m^T T m with T the second-moment tensor
    n = u.size
    scale = 1.5 * c2 / (n - 1)
    m = np.empty((n, 3))
    t = np.zeros((3, 3))
    new = np.empty(3)
    accepted = 0
    for sweep in range(uniforms.shape[0]):
        t[:, :] = 0.0
        for j in range(n):
            _unit(u[j], phi[j], m[j])
            for a in range(3):
                for b in range(3):
                    t[a, b] += m[j, a] * m[j, b]
        for i in range(n):
            u_new, phi_new = _propose(
                u[i], phi[i], width, uniforms[sweep, i, 0], uniforms[sweep, i, 1]
            )
            _unit(u_new, phi_new, new)
            overlap = new[0] * m[i, 0] + new[1] * m[i, 1] + new[2] * m[i, 2]
            after = _quadratic_form(t, new) - overlap * overlap
            before = _quadratic_form(t, m[i]) - 1.0
            if _accept(beta * scale * (after - before), uniforms[sweep, i, 2]):
                for a in range(3):
                    for b in range(3):
                        t[a, b] += new[a] * new[b] - m[i, a] * m[i, b]
                m[i, 0] = new[0]
                m[i, 1] = new[1]
                m[i, 2] = new[2]
                u[i] = u_new
                phi[i] = phi_new
                accepted += 1
    return accepted


@njit(nogil=True)
def _series(coeffs: FloatArray, x: float) -> float:
    total = coeffs[0]
    if coeffs.size == 1:
        return total
    p_prev = 1.0
    p = x
    total += coeffs[1] * x
    for k in range(1, coeffs.size - 1):
        p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        total += coeffs[k + 1] * p_next
        p_prev = p
        p = p_next
    return total


@njit(nogil=True)
def _sweeps_legendre(
    u: FloatArray,
    phi: FloatArray,
    coeffs: FloatArray,
    beta: float,
    width: float,
    uniforms: FloatArray,
) -> int:
    n = u.size
    scale = 1.0 / (n - 1)
    m = np.empty((n, 3))
    new = np.empty(3)
    accepted = 0
    for j in range(n):
        _unit(u[j], phi[j], m[j])
    for sweep in range(uniforms.shape[0]):
        for i in range(n):
            u_new, phi_new = _propose(
                u[i], phi[i], width, uniforms[sweep, i, 0], uniforms[sweep, i, 1]
            )
            _unit(u_new, phi_new, new)
            change = 0.0
            for j in range(n):
                if j == i:
                    continue
                x_new = new[0] * m[j, 0] + new[1] * m[j, 1] + new[2] * m[j, 2]
                x_old = m[i, 0] * m[j, 0] + m[i, 1] * m[j, 1] + m[i, 2] * m[j, 2]
                change += _series(coeffs, x_new) - _series(coeffs, x_old)
            if _accept(beta * scale * change, uniforms[sweep, i, 2]):
                m[i, 0] = new[0]
                m[i, 1] = new[1]
                m[i, 2] = new[2]
                u[i] = u_new
                phi[i] = phi_new
                accepted += 1
    return accepted


@dataclass
class ParticleSystem:
    """
    Orientations of N rods at inverse temperature beta.

    :param u: cos(theta) of each rod, in [0, 1].
    :param phi: azimuth of each rod, in [0, 2 pi).
    :param beta: inverse temperature, >= 0.
    :param potential: pair potential.
    """

    u: FloatArray
    phi: FloatArray
    beta: float
    potential: AxisymmetricPotential

    def __post_init__(self) -> None:
        self.u = np.ascontiguousarray(self.u, dtype=np.float64)
        self.phi = np.ascontiguousarray(self.phi, dtype=np.float64)
        if self.u.ndim != 1 or self.u.shape != self.phi.shape or self.u.size < 2:
            raise InvalidArgumentError("a system needs at least two rods with matching u and phi")
        if np.any(self.u < 0.0) or np.any(self.u > 1.0):
            raise InvalidArgumentError("u must lie in [0, 1]")
        if np.any(self.phi < 0.0) or np.any(self.phi >= TWO_PI):
            raise InvalidArgumentError("phi must lie in [0, 2 pi)")
        if not math.isfinite(self.beta) or self.beta < 0.0:
            raise InvalidArgumentError(f"beta must be finite and >= 0, got {self.beta!r}")

    @classmethod
    def random(
        cls,
        n: int,
        beta: float,
        potential: AxisymmetricPotential,
        rng: np.random.Generator,
    ) -> "ParticleSystem":
        """Uniformly random orientations."""
        return cls(u=rng.random(n), phi=TWO_PI * rng.random(n), beta=beta, potential=potential)

    @property
    def n(self) -> int:
        """Number of rods."""
        return int(self.u.size)

    def directions(self) -> FloatArray:
        """Unit vectors, shape (N, 3)."""
        return _cartesian(self.u, self.phi)


def _cartesian(u: FloatArray, phi: FloatArray) -> FloatArray:
    s = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    return np.stack([s * np.cos(phi), s * np.sin(phi), u], axis=-1)


def _is_quadrupolar(potential: AxisymmetricPotential) -> bool:
    return set(potential.degrees) <= {0, 2}


def _run_sweeps(system: ParticleSystem, width: float, uniforms: FloatArray) -> int:
    potential = system.potential
    if _is_quadrupolar(potential):
        return int(
            _sweeps_quadrupole(
                system.u,
                system.phi,
                float(potential.coefficient(2)),
                float(system.beta),
                float(width),
                uniforms,
            ),
        )
    coeffs = np.zeros(potential.max_degree + 1)
    for degree, coefficient in potential.coeffs.items():
        coeffs[degree] = coefficient
    return int(
        _sweeps_legendre(
            system.u,
            system.phi,
            coeffs,
            float(system.beta),
            float(width),
            uniforms,
        ),
    )


def metropolis_sweep(
    system: ParticleSystem,
    proposal_width: float,
    rng: np.random.Generator,
) -> tuple[ParticleSystem, int]:
    """
    One attempted rotation per rod, in index order.

    The system is updated in place and returned with the acceptance count.

    :param system: rods.
    :param proposal_width: step in u; the azimuth steps by pi times this.
    :param rng: source of uniforms.
    :return: system and number of accepted moves.
    """
    if not proposal_width > 0.0:
        raise InvalidArgumentError("proposal width must be positive")
    uniforms = rng.random((1, system.n, 3))
    return system, _run_sweeps(system, min(proposal_width, 1.0), uniforms)


def total_energy(system: ParticleSystem) -> float:
    """V_N = (N - 1)^-1 sum over pairs of U(m_i . m_j)."""
    m = system.directions()
    upper = np.triu_indices(system.n, k=1)
    cosines = (m @ m.T)[upper]
    return float(np.sum(system.potential.evaluate(cosines)) / (system.n - 1))


def energy_change(system: ParticleSystem, index: int, u_new: float, phi_new: float) -> float:
    """
    V_N after moving rod `index` to (u_new, phi_new), minus V_N before.

    :param system: rods.
    :param index: rod to move.
    :param u_new: new cos(theta).
    :param phi_new: new azimuth.
    :return: energy difference.
    """
    m = system.directions()
    others = np.delete(m, index, axis=0)
    new = _cartesian(np.array([u_new]), np.array([phi_new]))[0]
    after = system.potential.evaluate(others @ new)
    before = system.potential.evaluate(others @ m[index])
    return float(np.sum(after - before) / (system.n - 1))


def director_tensor(system: ParticleSystem) -> FloatArray:
    """Nematic tensor Q = (2N)^-1 sum_i (3 m_i m_i^T - I)."""
    m = system.directions()
    return (3.0 * m.T @ m / system.n - np.eye(3)) / 2.0


def director(system: ParticleSystem) -> FloatArray:
    """Principal axis of the nematic tensor."""
    _, vectors = np.linalg.eigh(director_tensor(system))
    return vectors[:, -1]


def leave_one_out_order(directions: FloatArray) -> float:
    """
    1 - mean_i (m_i . n_i)^2 with n_i the director of the other N - 1 rods.

    :param directions: unit vectors, shape (N, 3).
    :return: instantaneous order parameter.
    """
    second_moment = directions.T @ directions
    others = second_moment[None, :, :] - directions[:, :, None] * directions[:, None, :]
    _, vectors = np.linalg.eigh(others)
    axes = vectors[:, :, -1]
    overlap = np.einsum("ij,ij->i", directions, axes)
    return float(1.0 - np.mean(overlap**2))


def integrated_autocorrelation_time(samples: FloatArray, window: float = SOKAL_WINDOW) -> float:
    """
    tau = 1 + 2 sum_t rho(t), truncated at the first M with M >= window * tau(M).

    :param samples: time series.
    :param window: Sokal window constant.
    :return: tau in units of samples; 1 for uncorrelated data.
    """
    x = np.asarray(samples, dtype=np.float64) - np.mean(samples)
    n = x.size
    if n < 2 or not np.any(x):
        return 1.0
    spectrum = np.fft.rfft(x, n=2 * n)
    acf = np.fft.irfft(spectrum * np.conjugate(spectrum))[:n]
    acf = acf / acf[0]
    taus = 2.0 * np.cumsum(acf) - 1.0
    cutoff = np.arange(n) < window * taus
    index = int(np.argmin(cutoff)) if not np.all(cutoff) else n - 1
    return float(max(taus[index], 1.0))


def batch_means_error(samples: FloatArray, n_batches: int = DEFAULT_BATCHES) -> float:
    """
    Standard error of the mean from non-overlapping batch means.

    :param samples: time series, at least two entries.
    :param n_batches: target number of batches.
    :return: standard error.
    """
    x = np.asarray(samples, dtype=np.float64)
    batches = min(n_batches, x.size)
    if batches < 2:
        raise InvalidArgumentError("batch means need at least two samples")
    size = x.size // batches
    means = x[: batches * size].reshape(batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


class McEstimate(BaseModel):
    """Monte Carlo estimate of the order parameter with diagnostics."""

    n_particles: int
    beta: float
    mean: float
    std_error: float
    n_samples: int
    acceptance_rate: float
    integrated_autocorrelation_time: float
    proposal_width: float
    seed: Optional[int] = None
    warnings: list[str] = []


def _tune(width: float, acceptance: float) -> float:
    factor = min(max(acceptance / TARGET_ACCEPTANCE, 0.5), 2.0)
    return min(max(width * factor, WIDTH_BOUNDS[0]), WIDTH_BOUNDS[1])


def estimate_order_parameter(
    n_particles: int,
    beta: float,
    U: AxisymmetricPotential,
    n_sweeps: int,
    n_burnin: int,
    seed: int,
    proposal_width: float = 0.5,
    measure_every: int = 10,
) -> McEstimate:
    """
    Time average of the frame-aligned order parameter after burn-in.

    The proposal width is tuned toward TARGET_ACCEPTANCE during burn-in and
    frozen afterwards. Production sweeps that do not complete a measurement
    interval are not run.

    :param n_particles: number of rods, >= 2.
    :param beta: inverse temperature.
    :param U: pair potential.
    :param n_sweeps: total sweeps including burn-in.
    :param n_burnin: tuning and equilibration sweeps.
    :param seed: seed of numpy's default_rng.
    :param proposal_width: initial proposal width.
    :param measure_every: sweeps between measurements.
    :return: estimate.
    """
    if not n_sweeps > n_burnin >= 0:
        raise InvalidArgumentError(f"need n_sweeps > n_burnin >= 0, got {n_sweeps}, {n_burnin}")
    if measure_every < 1:
        raise InvalidArgumentError("measure_every must be at least 1")
    n_samples = (n_sweeps - n_burnin) // measure_every
    if n_samples < 2:
        raise InvalidArgumentError("production run yields fewer than two measurements")

    rng = np.random.default_rng(seed)
    system = ParticleSystem.random(n_particles, beta, U, rng)
    width = min(max(proposal_width, WIDTH_BOUNDS[0]), WIDTH_BOUNDS[1])
    done = 0
    while done < n_burnin:
        chunk = min(TUNE_CHUNK, n_burnin - done)
        accepted = _run_sweeps(system, width, rng.random((chunk, n_particles, 3)))
        width = _tune(width, accepted / (chunk * n_particles))
        done += chunk
    logger.debug("burn-in done after {} sweeps, proposal width {:.4g}", n_burnin, width)

    samples = np.empty(n_samples)
    accepted = 0
    for index in range(n_samples):
        accepted += _run_sweeps(system, width, rng.random((measure_every, n_particles, 3)))
        samples[index] = leave_one_out_order(system.directions())
    acceptance = accepted / (n_samples * measure_every * n_particles)

    warnings = []
    low, high = ACCEPTANCE_WINDOW
    if not low <= acceptance <= high:
        message = f"acceptance rate {acceptance:.3f} outside [{low}, {high}] after tuning"
        logger.warning(message)
        warnings.append(message)
    estimate = McEstimate(
        n_particles=n_particles,
        beta=beta,
        mean=float(np.mean(samples)),
        std_error=batch_means_error(samples),
        n_samples=n_samples,
        acceptance_rate=acceptance,
        integrated_autocorrelation_time=integrated_autocorrelation_time(samples) * measure_every,
        proposal_width=width,
        seed=seed,
        warnings=warnings,
    )
    logger.info(
        "N={} beta={}: xi = {:.5f} +- {:.5f}, acceptance {:.3f}",
        n_particles,
        beta,
        estimate.mean,
        estimate.std_error,
        acceptance,
    )
    return estimate


def chain_seeds(seed: int, chains: int) -> list[int]:
    """Independent child seeds spawned from one root seed."""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(chains)]


def run_chains(
    n_particles: int,
    beta: float,
    U: AxisymmetricPotential,
    n_sweeps: int,
    n_burnin: int,
    seed: int,
    chains: int = 1,
    map_fn: Optional[Callable[[Callable[[int], McEstimate], Iterable[int]], Iterable[McEstimate]]] = None,
) -> list[McEstimate]:
    """
    Independent chains with seeds spawned from `seed`, in chain order.

    :param n_particles: number of rods.
    :param beta: inverse temperature.
    :param U: pair potential.
    :param n_sweeps: total sweeps per chain.
    :param n_burnin: burn-in sweeps per chain.
    :param seed: root seed.
    :param chains: number of chains, >= 1.
    :param map_fn: ordered map, builtin map by default.
    :return: one estimate per chain.
    """
    if chains < 1:
        raise InvalidArgumentError("at least one chain is required")
    task = partial(
        _chain_task,
        n_particles=n_particles,
        beta=beta,
        U=U,
        n_sweeps=n_sweeps,
        n_burnin=n_burnin,
    )
    mapper = map_fn or map
    return list(mapper(task, chain_seeds(seed, chains)))


def _chain_task(
    seed: int,
    n_particles: int,
    beta: float,
    U: AxisymmetricPotential,
    n_sweeps: int,
    n_burnin: int,
) -> McEstimate:
    return estimate_order_parameter(n_particles, beta, U, n_sweeps, n_burnin, seed)


def merge_estimates(estimates: Sequence[McEstimate]) -> McEstimate:
    """
    Inverse-variance weighted combination of independent estimates.

    :param estimates: at least one estimate at the same N and beta.
    :return: merged estimate.
    """
    if not estimates:
        raise InvalidArgumentError("nothing to merge")
    if len(estimates) == 1:
        return estimates[0]
    weights = np.array([1.0 / est.std_error**2 for est in estimates])
    means = np.array([est.mean for est in estimates])
    samples = np.array([est.n_samples for est in estimates], dtype=np.float64)
    first = estimates[0]
    return McEstimate(
        n_particles=first.n_particles,
        beta=first.beta,
        mean=float(np.dot(weights, means) / np.sum(weights)),
        std_error=float(1.0 / math.sqrt(np.sum(weights))),
        n_samples=int(np.sum(samples)),
        acceptance_rate=float(np.dot(samples, [est.acceptance_rate for est in estimates]) / np.sum(samples)),
        integrated_autocorrelation_time=float(
            np.mean([est.integrated_autocorrelation_time for est in estimates]),
        ),
        proposal_width=float(np.mean([est.proposal_width for est in estimates])),
        seed=first.seed,
        warnings=[warning for est in estimates for warning in est.warnings],
    )
