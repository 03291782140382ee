"""Base helpers shared by every serializable record.

Provides the `RecordModel` mixin used by reports, verdicts and the
problem-file schema. It supplies the to_dict/to_json/from_dict/from_json
quartet required by :class:`RecordProtocol` and a default tabular render
driven by ``table_schema``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, ClassVar, List, Sequence, TypeVar

from pydantic import BaseModel, ConfigDict
from rich.console import Console

from dcdual.utils import render_table_from_schema

from .protocols import RecordProtocol
from .shared import TableSchema

T = TypeVar("T", bound="RecordModel")


def _model_dump(instance: BaseModel) -> dict[str, Any]:  # pragma: no cover - trivial helper
    return instance.model_dump(mode="json")


def dump_json_text(data: Any) -> str:
    """
    Serialize plain data to JSON text.

    Floats go through ``repr`` in the stdlib encoder, which is the shortest
    decimal string that round-trips to the same double, so two identical
    runs produce identical bytes.

    :param data: JSON-compatible structure
    :type data: Any
    :return: JSON text with a trailing newline
    :rtype: str
    """

    return json.dumps(data, ensure_ascii=False, indent=2, allow_nan=False) + "\n"


# MARK: Record Model
class RecordModel(BaseModel):
    """Extend Pydantic's BaseModel with JSON helpers and table rendering."""

    model_config = ConfigDict(frozen=True)

    table_title: ClassVar[str] = "Record"

    def to_dict(self) -> dict[str, Any]:
        return _model_dump(self)

    def to_json(self, json_file_path: Path | str) -> None:
        path = Path(json_file_path)
        path.write_text(dump_json_text(self.to_dict()), encoding="utf-8")

    @classmethod
    def from_dict(cls: type[T], data: dict[str, Any]) -> T:
        return cls.model_validate(data)

    @classmethod
    def from_json(cls: type[T], json_file_path: Path | str) -> T:
        path = Path(json_file_path)
        with path.open("r", encoding="utf-8") as handle:
            data = json.load(handle)
        return cls.from_dict(data)

    @classmethod
    def table_schema(cls) -> List[TableSchema]:
        """Default schema: one column per field."""

        return [TableSchema(name=name, header=name) for name in cls.model_fields]

    @classmethod
    def render_many(cls, items: Sequence["RecordModel"], console: Console, title: str | None = None) -> None:
        """Render a homogeneous list of records as one table."""

        render_table_from_schema(title or cls.table_title, cls.table_schema(), list(items), console)

    def render(self, console: Console) -> None:
        self.render_many([self], console)


def write_records(records: Sequence[RecordProtocol], json_file_path: Path | str) -> None:
    """
    Write a list of records as a JSON array.

    :param records: Records to serialize
    :type records: Sequence[RecordProtocol]
    :param json_file_path: Destination path
    :type json_file_path: Path | str
    """

    path = Path(json_file_path)
    path.write_text(dump_json_text([r.to_dict() for r in records]), encoding="utf-8")


def read_records(model: type[T], json_file_path: Path | str) -> list[T]:
    """Read a JSON array written by :func:`write_records`."""

    path = Path(json_file_path)
    with path.open("r", encoding="utf-8") as handle:
        data = json.load(handle)
    return [model.from_dict(item) for item in data]
