"""Result records produced by the solver and the oracle.

Each record is a frozen :class:`RecordModel` so it can be written to the
results file, read back, and rendered as a Rich table row.
"""

from __future__ import annotations

from typing import ClassVar, List, Optional

from pydantic import Field
from rich.console import Console

from dcdual.utils import format_flag, format_residual, format_sig, format_vector, render_table_from_schema

from ._base import RecordModel
from .problem import DualPoint
from .shared import DomainClass, TableSchema, TrialityClass, Verdict


# MARK: Critical point
class CriticalPointReport(RecordModel):
    """A recovered primal/dual critical pair with its classification."""

    table_title: ClassVar[str] = "Critical points"

    tau: list[float] = Field(..., description="Dual multipliers of the exponential terms")
    sigma: list[float] = Field(..., description="Dual multipliers of the quartic terms")
    x: list[float] = Field(..., description="Recovered primal point G(zeta)^-1 f")
    domain: DomainClass = Field(..., description="Definiteness class of G(zeta)")
    triality: TrialityClass = Field(TrialityClass.UNCLASSIFIED, description="Triality class of the pair")
    primal_value: float = Field(..., description="Pi(x)")
    dual_value: float = Field(..., description="Pi^d(zeta)")
    complementary_value: float = Field(..., description="Xi(x, zeta)")
    gap_residual: float = Field(..., description="Largest pairwise difference of the three values")
    delta: float = Field(..., description="Spectral lower bound on eig(G(zeta))")
    grad_norm_dual: float = Field(..., description="Infinity norm of the dual gradient")
    grad_norm_primal: float = Field(..., description="Infinity norm of the primal gradient at x")
    converged: bool = Field(True, description="Stationarity reached and gap within tolerance")
    iterations: int = Field(0, description="Newton steps taken")
    start_index: int = Field(-1, description="Multistart index that produced the point (-1 is the interior start)")
    dual_hessian_eigenvalues: list[float] = Field(default_factory=list, description="Eigenvalues of the dual Hessian")
    primal_hessian_eigenvalues: list[float] = Field(default_factory=list, description="Eigenvalues of the primal Hessian")
    sign_transfer_holds: Optional[bool] = Field(None, description="Whether the primal Hessian has the sign the triality class predicts")

    @property
    def zeta(self) -> DualPoint:
        return DualPoint.of(self.tau, self.sigma)

    @property
    def zeta_vector(self) -> list[float]:
        return [*self.tau, *self.sigma]

    @classmethod
    def table_schema(cls) -> List[TableSchema]:
        return [
            TableSchema(name="zeta_vector", header="zeta", style="magenta", no_wrap=True, formatter=format_vector),
            TableSchema(name="x", header="x", style="cyan", no_wrap=True, formatter=format_vector),
            TableSchema(name="domain", header="Domain", formatter=lambda d: d.display_label),
            TableSchema(name="triality", header="Triality", style="bold", formatter=lambda t: t.display_label),
            TableSchema(name="primal_value", header="Pi", justify="right", formatter=format_sig),
            TableSchema(name="dual_value", header="Pi^d", justify="right", formatter=format_sig),
            TableSchema(name="gap_residual", header="Gap", justify="right", formatter=format_residual),
            TableSchema(name="delta", header="Delta", justify="right", formatter=format_sig),
        ]

    @classmethod
    def render_many(cls, items, console: Console, title: str | None = None) -> None:
        # properties are not fields, so rows are materialized as dicts
        rows = [{**item.model_dump(), "zeta_vector": item.zeta_vector} for item in items]
        render_table_from_schema(title or cls.table_title, cls.table_schema(), rows, console)


class StationarySearch(RecordModel):
    """Outcome of a multistart stationary-point search."""

    table_title: ClassVar[str] = "Multistart summary"

    reports: list[CriticalPointReport] = Field(default_factory=list, description="Deduplicated stationary points")
    starts: int = Field(0, description="Starts attempted (including the interior start)")
    converged: int = Field(0, description="Starts that reached stationarity before deduplication")
    dropped: int = Field(0, description="Starts that failed and were discarded")
    drop_reasons: dict[str, int] = Field(default_factory=dict, description="Failure counts per reason")

    @classmethod
    def table_schema(cls) -> List[TableSchema]:
        return [
            TableSchema(name="starts", header="Starts", justify="right"),
            TableSchema(name="converged", header="Converged", justify="right"),
            TableSchema(name="dropped", header="Dropped", justify="right"),
            TableSchema(name="unique", header="Unique", justify="right"),
            TableSchema(name="drop_reasons", header="Reasons", formatter=lambda d: ", ".join(f"{k}={v}" for k, v in sorted(d.items())) or "-"),
        ]

    @classmethod
    def render_many(cls, items, console: Console, title: str | None = None) -> None:
        rows = [{**item.model_dump(exclude={"reports"}), "unique": len(item.reports)} for item in items]
        render_table_from_schema(title or cls.table_title, cls.table_schema(), rows, console)


# MARK: Oracle records
class DerivativeCheck(RecordModel):
    """One finite-difference comparison."""

    table_title: ClassVar[str] = "Derivative checks"

    name: str = Field(..., description="Which derivative was checked")
    point: list[float] = Field(..., description="Evaluation point")
    relative_error: float = Field(..., description="max |analytic - numeric| / max(1, max |numeric|)")
    tolerance: float = Field(..., description="Acceptance threshold")
    verdict: Verdict = Field(..., description="PASS when relative_error <= tolerance")

    @classmethod
    def table_schema(cls) -> List[TableSchema]:
        return [
            TableSchema(name="name", header="Check", style="magenta"),
            TableSchema(name="point", header="At", style="cyan", formatter=format_vector),
            TableSchema(name="relative_error", header="Rel. error", justify="right", formatter=format_residual),
            TableSchema(name="tolerance", header="Tol", justify="right", formatter=format_residual),
            TableSchema(name="verdict", header="Verdict", formatter=str),
        ]


class LocalMinimum(RecordModel):
    """A descent limit point found by the brute-force oracle."""

    table_title: ClassVar[str] = "Oracle local minima"

    x: list[float] = Field(..., description="Limit point")
    value: float = Field(..., description="Pi at the limit point")
    grad_norm: float = Field(..., description="Infinity norm of the primal gradient there")

    @classmethod
    def table_schema(cls) -> List[TableSchema]:
        return [
            TableSchema(name="x", header="x", style="cyan", formatter=format_vector),
            TableSchema(name="value", header="Pi", justify="right", formatter=format_sig),
            TableSchema(name="grad_norm", header="|grad|", justify="right", formatter=format_residual),
        ]


class CrossCheckVerdict(RecordModel):
    """Comparison of the dual global minimizer with the brute-force oracle."""

    table_title: ClassVar[str] = "Oracle cross-check"

    verdict: Verdict = Field(..., description="PASS when values and points agree")
    dual_value: float = Field(..., description="Pi at the recovered MIN_MAX point")
    oracle_value: float = Field(..., description="Best value found by the oracle")
    x_dual: list[float] = Field(..., description="Recovered MIN_MAX point")
    x_oracle: list[float] = Field(..., description="Oracle minimizer closest to x_dual among tied minima")
    value_error: float = Field(..., description="|dual_value - oracle_value|")
    x_error: float = Field(..., description="Infinity-norm distance between x_dual and x_oracle")
    values_only: bool = Field(False, description="Several oracle minima tie, so only values were compared")
    delta: float = Field(..., description="Delta at the dual point")
    local_minima: list[LocalMinimum] = Field(default_factory=list, description="All deduplicated oracle minima")

    @classmethod
    def table_schema(cls) -> List[TableSchema]:
        return [
            TableSchema(name="verdict", header="Verdict", style="bold", formatter=str),
            TableSchema(name="dual_value", header="Pi (dual)", justify="right", formatter=format_sig),
            TableSchema(name="oracle_value", header="Pi (oracle)", justify="right", formatter=format_sig),
            TableSchema(name="x_dual", header="x (dual)", formatter=format_vector),
            TableSchema(name="x_oracle", header="x (oracle)", formatter=format_vector),
            TableSchema(name="value_error", header="|dPi|", justify="right", formatter=format_residual),
            TableSchema(name="x_error", header="|dx|", justify="right", formatter=format_residual),
            TableSchema(name="values_only", header="Values only", formatter=format_flag),
        ]

    def render(self, console: Console) -> None:
        super().render(console)
        if self.local_minima:
            LocalMinimum.render_many(self.local_minima, console)
