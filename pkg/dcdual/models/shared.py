"""Shared enumerations and typed schema descriptors.

This module contains the small tag types that flow through every layer
(domain membership of a dual point, triality class of a critical pair,
check verdicts) and `TableSchema`, a typed descriptor for a column in a
Rich table.

"""

from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Callable, Optional


# MARK: Tags
class DomainClass(StrEnum):
    """Definiteness of G(zeta) at a dual point."""

    SA_PLUS = "sa_plus"
    SA_MINUS = "sa_minus"
    INDEFINITE = "indefinite"
    SINGULAR = "singular"

    def __str__(self) -> str:
        return self.value

    @property
    def display_label(self) -> str:
        """Human-friendly label for tables and log lines."""

        return {
            DomainClass.SA_PLUS: "S_a+",
            DomainClass.SA_MINUS: "S_a-",
            DomainClass.INDEFINITE: "indefinite",
            DomainClass.SINGULAR: "singular",
        }[self]


class TrialityClass(StrEnum):
    """Extremality correspondence of a primal/dual critical pair."""

    MIN_MAX = "min_max"
    DOUBLE_MAX = "double_max"
    DOUBLE_MIN = "double_min"
    UNCLASSIFIED = "unclassified"

    def __str__(self) -> str:
        return self.value

    @property
    def display_label(self) -> str:
        return self.value.replace("_", "-")

    @property
    def sort_rank(self) -> int:
        """Ordering used when listing reports."""

        return list(TrialityClass).index(self)


class Verdict(StrEnum):
    PASS = "PASS"
    FAIL = "FAIL"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def of(cls, ok: bool) -> "Verdict":
        return cls.PASS if ok else cls.FAIL


class ContourKind(StrEnum):
    PRIMAL = "primal"
    DUAL = "dual"


# MARK: Table Schema
@dataclass
class TableSchema:
    """Schema descriptor for a table column.

    :param name: Attribute name on the item to read
    :type name: str
    :param header: Column header text shown in the table
    :type header: str
    :param style: Optional Rich style string for the column
    :type style: Optional[str]
    :param no_wrap: If True, the column will not wrap
    :type no_wrap: bool
    :param justify: Optional justification (e.g., 'right')
    :type justify: Optional[str]
    :param formatter: Optional callable used to format individual cell values
    :type formatter: Optional[Callable[[Any], str]]

    :return: dataclass instance representing a column schema
    :rtype: TableSchema
    """

    name: str
    header: str
    style: Optional[str] = None
    no_wrap: bool = False
    justify: Optional[str] = None
    formatter: Optional[Callable[[Any], str]] = None
