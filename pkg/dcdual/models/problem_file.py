"""On-disk problem schema.

This module contains the `ProblemFile` Pydantic model: the JSON encoding
of an instance (n, p, r, the matrices row-major, the shifts and f) plus
optional solver overrides. Shape checks run in a model validator so a bad
file is reported with the field path of the offending entry.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ProblemValidationError
from .problem import PrimalProblem
from .settings import SolveConfig

Matrix = list[list[float]]


def _check_matrix(name: str, matrix: Matrix, n: int) -> None:
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise ValueError(f"{name} must be a {n}x{n} row-major array")


# MARK: ProblemFile
class ProblemFile(BaseModel):
    """
    JSON schema of a problem instance.

    :param n: Primal dimension
    :type n: int
    :param p: Number of exponential terms
    :type p: int
    :param r: Number of quartic terms
    :type r: int
    """

    model_config = ConfigDict(extra="forbid")

    name: str = Field("", description="Optional label shown in reports")
    n: int = Field(..., ge=1, description="Dimension of the primal variable x")
    p: int = Field(..., ge=0, description="Number of exponential terms")
    r: int = Field(..., ge=0, description="Number of quartic terms")
    A: list[Matrix] = Field(default_factory=list, description="p symmetric n x n matrices, row-major")
    alpha: list[float] = Field(default_factory=list, description="p shifts alpha_i")
    B: list[Matrix] = Field(default_factory=list, description="r symmetric positive-definite n x n matrices, row-major")
    beta: list[float] = Field(default_factory=list, description="r shifts beta_j")
    C: Matrix = Field(..., description="Symmetric positive-definite n x n matrix")
    f: list[float] = Field(..., description="Linear term, n reals")
    config: Optional[SolveConfig] = Field(None, description="Optional solve-config overrides")

    @model_validator(mode="after")
    def _check_shapes(self) -> Self:
        if len(self.A) != self.p:
            raise ValueError(f"A holds {len(self.A)} matrices but p = {self.p}")
        if len(self.alpha) != self.p:
            raise ValueError(f"alpha holds {len(self.alpha)} values but p = {self.p}")
        if len(self.B) != self.r:
            raise ValueError(f"B holds {len(self.B)} matrices but r = {self.r}")
        if len(self.beta) != self.r:
            raise ValueError(f"beta holds {len(self.beta)} values but r = {self.r}")
        for i, matrix in enumerate(self.A):
            _check_matrix(f"A[{i}]", matrix, self.n)
        for j, matrix in enumerate(self.B):
            _check_matrix(f"B[{j}]", matrix, self.n)
        _check_matrix("C", self.C, self.n)
        if len(self.f) != self.n:
            raise ValueError(f"f holds {len(self.f)} values but n = {self.n}")
        return self

    def to_problem(self) -> PrimalProblem:
        """Build the validated numerical instance."""

        n = self.n
        return PrimalProblem(
            A=np.asarray(self.A, dtype=float).reshape(self.p, n, n),
            alpha=np.asarray(self.alpha, dtype=float),
            B=np.asarray(self.B, dtype=float).reshape(self.r, n, n),
            beta=np.asarray(self.beta, dtype=float),
            C=np.asarray(self.C, dtype=float),
            f=np.asarray(self.f, dtype=float),
        )

    @classmethod
    def from_problem(cls, problem: PrimalProblem, name: str = "", config: SolveConfig | None = None) -> "ProblemFile":
        return cls(
            name=name,
            n=problem.n,
            p=problem.p,
            r=problem.r,
            A=problem.A.tolist(),
            alpha=problem.alpha.tolist(),
            B=problem.B.tolist(),
            beta=problem.beta.tolist(),
            C=problem.C.tolist(),
            f=problem.f.tolist(),
            config=config,
        )

    def to_dict(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)

    def to_json(self, json_file_path: Path | str) -> None:
        path = Path(json_file_path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemFile":
        return cls.model_validate(data)

    @classmethod
    def from_json(cls, json_file_path: Path | str) -> "ProblemFile":
        path = Path(json_file_path)
        with path.open("r", encoding="utf-8") as handle:
            data = json.load(handle)
        return cls.from_dict(data)


def describe_validation_error(exc: ValidationError) -> str:
    """Flatten a pydantic error into 'field.path: message' lines."""

    lines = []
    for err in exc.errors():
        loc = ".".join(str(part) for part in err.get("loc", ())) or "<root>"
        lines.append(f"{loc}: {err.get('msg', 'invalid value')}")
    return "\n".join(lines)


def load_problem(json_file_path: Path | str) -> tuple[ProblemFile, PrimalProblem]:
    """
    Read and validate a problem file.

    :param json_file_path: Path to the JSON problem file
    :type json_file_path: Path | str
    :raises FileNotFoundError: when the file does not exist
    :raises ProblemValidationError: on schema or numerical validation failures
    :return: The parsed schema and the numerical instance
    :rtype: tuple[ProblemFile, PrimalProblem]
    """

    try:
        spec = ProblemFile.from_json(json_file_path)
    except ValidationError as exc:
        raise ProblemValidationError(f"invalid problem file {json_file_path}:\n{describe_validation_error(exc)}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemValidationError(f"invalid JSON in {json_file_path}: {exc}") from exc
    return spec, spec.to_problem()
