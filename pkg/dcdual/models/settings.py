"""Solver and oracle configuration models.

`SolveConfig` gathers every tolerance and budget used by the dual
solver; `GridSpec` describes the brute-force oracle grid. Both are
Pydantic models so problem files can carry overrides that are validated
with field paths in the error message.
"""

from __future__ import annotations

import os
from typing import Self

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, model_validator

load_dotenv()

SERIAL_ENV_VAR = "DCDUAL_SERIAL"
LOG_LEVEL_ENV_VAR = "DCDUAL_LOG_LEVEL"


def serial_forced() -> bool:
    """Return True when the environment asks for serial multistart execution."""

    return os.environ.get(SERIAL_ENV_VAR, "").strip().lower() in {"1", "true", "yes", "on"}


# MARK: SolveConfig
class SolveConfig(BaseModel):
    """
    Tolerances, iteration caps and multistart parameters.

    :param grad_tol: Stationarity threshold on the infinity norm of the dual gradient
    :param max_iter: Newton step cap per start
    :param cone_margin: Fraction-to-boundary factor keeping iterates inside their definiteness region
    :param multistart_count: Number of random starts for the stationary-point search
    :param sa_minus_seed_count: Number of extra starts placed in S_a- at stratified distances from det G = 0
    :param seed: Seed of the multistart generator
    :param tau_floor: Lower clamp keeping tau strictly positive
    :param singular_tol: Relative eigenvalue threshold under which G is treated as singular
    :param gap_tol: Tolerance on the primal/dual value gap
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    grad_tol: float = Field(1e-10, gt=0, description="Stationarity threshold on the infinity norm of the dual gradient")
    max_iter: int = Field(200, gt=0, description="Newton step cap per start")
    cone_margin: float = Field(0.95, gt=0, lt=1, description="Fraction-to-boundary factor for staying inside the current definiteness region")
    multistart_count: int = Field(64, gt=0, description="Number of random multistart seeds")
    sa_minus_seed_count: int = Field(32, ge=0, description="Number of multistart seeds drawn from G(zeta) negative definite")
    seed: int = Field(0, ge=0, description="Seed for reproducible multistart")
    tau_floor: float = Field(1e-12, gt=0, description="Lower clamp keeping tau > 0")
    singular_tol: float = Field(1e-10, gt=0, description="G is singular when min|eig| <= singular_tol * max(1, ||G||_2)")
    gap_tol: float = Field(1e-6, gt=0, description="Maximum pairwise difference among primal, total complementary and dual values")
    hessian_margin: float = Field(1e-8, gt=0, description="Eigenvalue margin used for Hessian sign tests")
    dedup_tol: float = Field(1e-6, gt=0, description="Relative distance under which two stationary points are merged")
    max_start_doublings: int = Field(60, gt=0, description="Doubling budget of the interior start search")
    serial: bool = Field(default_factory=serial_forced, description="Run multistart tasks serially")
    progress: bool = Field(False, description="Show a progress bar over multistart tasks")

    def merged(self, **overrides) -> Self:
        """Return a copy with the non-None overrides applied and validated."""

        updates = {key: value for key, value in overrides.items() if value is not None}
        if not updates:
            return self
        return type(self).model_validate({**self.model_dump(), **updates})


# MARK: GridSpec
class GridSpec(BaseModel):
    """
    Rectangular grid for the brute-force oracle.

    :param lower: Lower bound per coordinate
    :param upper: Upper bound per coordinate
    :param points_per_axis: Grid resolution per axis (>= 3)
    :param refine_steps: Gradient-descent steps per refined seed
    :param seeds: Number of best grid cells refined by descent
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    lower: list[float] = Field(..., min_length=1, description="Lower bound per coordinate")
    upper: list[float] = Field(..., min_length=1, description="Upper bound per coordinate")
    points_per_axis: int = Field(201, ge=3, description="Grid points per axis")
    refine_steps: int = Field(500, ge=0, description="Descent refinement steps")
    seeds: int = Field(25, ge=1, description="Best grid cells refined by descent")
    armijo_c: float = Field(1e-4, gt=0, lt=1, description="Armijo sufficient-decrease constant")

    @model_validator(mode="after")
    def _check_bounds(self) -> Self:
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("lower must be strictly below upper in every coordinate")
        return self

    @property
    def n(self) -> int:
        return len(self.lower)

    @classmethod
    def box(cls, n: int, lo: float = -5.0, hi: float = 5.0, points: int = 201, **kwargs) -> "GridSpec":
        """Build the cube [lo, hi]^n."""

        return cls(lower=[lo] * n, upper=[hi] * n, points_per_axis=points, **kwargs)
