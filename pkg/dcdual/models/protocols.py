"""Record protocol

Provides a lightweight Protocol describing the serialization and rendering
API shared by every result record (critical point reports, derivative
checks, cross-check verdicts). We keep this as a Protocol so static type
checkers can verify structural compatibility without requiring runtime
inheritance, and so the CLI can write and render any record uniformly.

"""

from pathlib import Path
from typing import Protocol

from rich.console import Console


# MARK: Record Protocol
class RecordProtocol(Protocol):
    """Protocol describing the minimal record API used by the CLI writers."""

    def to_dict(self) -> dict:  # pragma: no cover - trivial
        """
        Serialize this record to a plain dict suitable for JSON transport.

        :return: Mapping of primitive values
        :rtype: dict
        """

    def to_json(self, json_file_path: Path | str) -> None:  # pragma: no cover - trivial
        """
        Persist this record to a JSON file.

        :param json_file_path: Destination path for JSON
        :type json_file_path: str | Path

        :return: None
        :rtype: None
        """

    @classmethod
    def from_dict(cls, data: dict) -> "RecordProtocol":  # pragma: no cover - trivial
        """
        Reconstruct a record from a plain mapping.

        :param data: Mapping containing the record fields
        :type data: dict

        :return: New instance implementing RecordProtocol
        :rtype: RecordProtocol
        """

    @classmethod
    def from_json(cls, json_file_path: Path | str) -> "RecordProtocol":  # pragma: no cover - trivial
        """
        Load a record from a JSON file on disk.

        :param json_file_path: Path to JSON file
        :type json_file_path: str | Path

        :return: New instance implementing RecordProtocol
        :rtype: RecordProtocol
        """

    def render(self, console: Console) -> None:  # pragma: no cover - trivial
        """
        Render a readable representation of the record to the provided
        Rich Console instance.

        :param console: Rich Console to render output to
        :type console: Console

        :return: None
        :rtype: None
        """
