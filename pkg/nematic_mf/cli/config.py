"""
Run configuration.

A RunConfig is resolved from Settings defaults, then an optional JSON file
given by --config, then explicit command-line flags. The resolved model is
what --emit-config prints, so a run is reproducible from it alone.
"""

import argparse
from pathlib import Path
from typing import Any, Literal, Optional

import ujson
from pydantic import BaseModel, ConfigDict, Field, model_validator

from nematic_mf.exceptions import ConfigError
from nematic_mf.settings import LogLevel, settings
from nematic_mf.solvers.potential import LegendreSpec, MaierSaupeSpec, PotentialSpec

SeedDensity = Literal["uniform", "prolate", "oblate"]


class RunConfig(BaseModel):
    """Fully resolved description of a run."""

    model_config = ConfigDict(extra="forbid")

    potential: PotentialSpec = Field(default_factory=MaierSaupeSpec)
    quad_order: int = Field(gt=0)
    quad_levels: int = Field(ge=0)
    tol: float = Field(gt=0)
    damping: float = Field(gt=0, le=1)
    max_iter: int = Field(ge=0)
    scan_points: int = Field(ge=100)
    beta: Optional[float] = Field(None, ge=0)
    beta_min: float = Field(1.0, gt=0)
    beta_max: float = Field(20.0, gt=0)
    beta_steps: int = Field(200, ge=2)
    seed: int = 0
    seed_density: SeedDensity = "prolate"
    jobs: Optional[int] = Field(None, ge=1)
    n_particles: int = Field(64, ge=2)
    sweeps: int = Field(20_000, gt=0)
    burnin: int = Field(2_000, ge=0)
    chains: int = Field(1, ge=1)
    out: Optional[Path] = None
    log_level: LogLevel = LogLevel.INFO

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        if self.beta_min >= self.beta_max:
            raise ValueError(f"empty beta range [{self.beta_min}, {self.beta_max}]")
        if self.sweeps <= self.burnin:
            raise ValueError("sweeps must exceed burnin")
        return self

    def require_beta(self) -> float:
        """
        The single inverse temperature of the run.

        :raises ConfigError: if --beta was not given.
        :return: beta.
        """
        if self.beta is None:
            raise ConfigError("this command needs --beta")
        return self.beta

    def maier_saupe_w(self) -> float:
        """
        Coupling of a Maier-Saupe run.

        :raises ConfigError: for other potentials.
        :return: w.
        """
        if not isinstance(self.potential, MaierSaupeSpec):
            raise ConfigError("this command supports only the Maier-Saupe potential")
        return self.potential.w


def settings_defaults() -> dict[str, Any]:
    """Ambient defaults taken from Settings."""
    return {
        "quad_order": settings.quad_order,
        "quad_levels": settings.quad_levels,
        "tol": settings.tol,
        "damping": settings.damping,
        "max_iter": settings.max_iter,
        "scan_points": settings.scan_points,
        "jobs": settings.jobs,
        "log_level": settings.log_level,
    }


def parse_coeffs(text: str) -> dict[int, float]:
    """
    Parse "0:1,2:-1" into {0: 1.0, 2: -1.0}.

    :param text: comma separated degree:value pairs.
    :raises ConfigError: on malformed input.
    :return: coefficients.
    """
    coeffs: dict[int, float] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        degree, sep, value = item.partition(":")
        try:
            if not sep:
                raise ValueError(item)
            coeffs[int(degree)] = float(value)
        except ValueError:
            raise ConfigError(f"malformed coefficient {item!r}, expected degree:value") from None
    if not coeffs:
        raise ConfigError("--coeffs is empty")
    return coeffs


def _load_file(path: Path) -> dict[str, Any]:
    try:
        with path.open(encoding="utf-8") as handle:
            data = ujson.load(handle)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _potential_from_flags(args: argparse.Namespace, current: Any) -> Optional[dict[str, Any]]:
    kind = getattr(args, "potential", None)
    w = getattr(args, "w", None)
    coeffs = getattr(args, "coeffs", None)
    if kind is None and w is None and coeffs is None:
        return None
    if isinstance(current, BaseModel):
        current = current.model_dump()
    current = current or {"type": "maier-saupe", "w": 1.0}
    kind = kind or ("legendre" if coeffs is not None else current.get("type", "maier-saupe"))
    if kind == "maier-saupe":
        if coeffs is not None:
            raise ConfigError("--coeffs applies to the legendre potential only")
        default_w = current.get("w", 1.0) if current.get("type") == "maier-saupe" else 1.0
        return MaierSaupeSpec(w=default_w if w is None else w).model_dump()
    if w is not None:
        raise ConfigError("--w applies to the maier-saupe potential only")
    if coeffs is not None:
        return LegendreSpec(coeffs=parse_coeffs(coeffs)).model_dump()
    if current.get("type") != "legendre":
        raise ConfigError("the legendre potential needs --coeffs")
    return current


FLAG_FIELDS = (
    "quad_order",
    "tol",
    "damping",
    "scan_points",
    "beta",
    "beta_min",
    "beta_max",
    "beta_steps",
    "seed",
    "seed_density",
    "jobs",
    "n_particles",
    "sweeps",
    "burnin",
    "chains",
    "out",
    "log_level",
)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Settings < --config file < explicit flags.

    :param args: parsed command line.
    :raises ConfigError: for unreadable files or inconsistent potential flags.
    :raises pydantic.ValidationError: for out-of-range values.
    :return: resolved configuration.
    """
    data = settings_defaults()
    config_path = getattr(args, "config", None)
    if config_path is not None:
        data.update(_load_file(Path(config_path)))
    for name in FLAG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    potential = _potential_from_flags(args, data.get("potential"))
    if potential is not None:
        data["potential"] = potential
    return RunConfig.model_validate(data)
