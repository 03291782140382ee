"""Utilities for rendering numeric records to the console.

This module centralizes how records (Pydantic models or plain dicts) are
rendered to the terminal using Rich, and how floats and vectors are
printed. Report floats use six significant digits, enough to compare
against the bundled example values.

"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Iterable, List, Sequence

from rich.console import Console
from rich.table import Table

if TYPE_CHECKING:
    from .models.shared import TableSchema

# MARK: Generic number helpers


def _coerce_numeric(value) -> float:
    """Coerce a value into a float, handling common string inputs."""

    if value is None:
        raise ValueError("Value is None")
    if isinstance(value, bool):
        raise TypeError(f"Unsupported type: {type(value)!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        stripped = value.strip()
        if not stripped:
            raise ValueError("Empty string")
        return float(stripped)
    # numpy scalars
    if hasattr(value, "__float__"):
        return float(value)
    raise TypeError(f"Unsupported type: {type(value)!r}")


# MARK: Formatters
def format_sig(v, digits: int = 6) -> str:
    """
    Format a real number to a number of significant digits.

    Returns '-' for None, 'inf'/'-inf'/'nan' for non-finite values and
    falls back to ``str`` for anything that is not numeric.

    :param v: Numeric value (int/float/str/numpy scalar) or None
    :param digits: Significant digits (default: 6)
    :return: Formatted string
    """
    if v is None:
        return "-"
    try:
        number = _coerce_numeric(v)
    except (TypeError, ValueError):
        return str(v)
    if math.isnan(number):
        return "nan"
    if math.isinf(number):
        return "inf" if number > 0 else "-inf"
    return f"{number:.{digits}g}"


def format_vector(values: Iterable | None, digits: int = 6) -> str:
    """Format a sequence of reals as a parenthesized tuple."""

    if values is None:
        return "-"
    try:
        items = list(values)
    except TypeError:
        return format_sig(values, digits)
    return "(" + ", ".join(format_sig(x, digits) for x in items) + ")"


def format_residual(v) -> str:
    """Format a small residual in scientific notation."""

    if v is None:
        return "-"
    try:
        number = _coerce_numeric(v)
    except (TypeError, ValueError):
        return str(v)
    return f"{number:.2e}"


def format_flag(v) -> str:
    """Format an optional boolean as yes/no/-."""

    if v is None:
        return "-"
    return "yes" if v else "no"


# MARK: Table Renderer
def render_table_from_schema(title: str, schema: List[TableSchema], items: Sequence, console: Console) -> None:
    """
    Render a Rich Table from a schema and list of objects.

    :param title: Title used for the Rich Table
    :type title: str

    :param schema: Column schema as TableSchema instances
    :type schema: List[TableSchema]

    :param items: Items to render. Each item may be a dict or an object with
        attributes matching the schema.name values.
    :type items: Sequence

    :param console: Rich Console to print the table to
    :type console: Console

    :return: None
    :rtype: None
    """
    table = Table(title=title, show_lines=False)
    for col in schema:
        if col.justify:
            table.add_column(col.header, style=col.style, justify=col.justify, no_wrap=col.no_wrap)
        else:
            table.add_column(col.header, style=col.style, no_wrap=col.no_wrap)

    for it in items:
        row = []
        for col in schema:
            if isinstance(it, dict):
                val = it.get(col.name)
            else:
                val = getattr(it, col.name, None)

            if val is None:
                rendered = "-"
            elif col.formatter:
                try:
                    rendered = col.formatter(val)
                except Exception:
                    # on any formatting failure, fall back to str()
                    rendered = str(val)
            elif isinstance(val, (list, tuple)):
                rendered = format_vector(val)
            elif isinstance(val, float):
                rendered = format_sig(val)
            else:
                rendered = val

            row.append(str(rendered))

        table.add_row(*row)

    console.print(table)
