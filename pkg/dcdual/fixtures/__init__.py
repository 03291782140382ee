"""Bundled problem files for the four worked two-dimensional examples."""

from importlib import resources
from pathlib import Path

EXAMPLES = ("example1", "example2", "example3", "example4")


def fixture_path(name: str) -> Path:
    """
    Path of a bundled problem file.

    :param name: One of ``EXAMPLES`` (with or without the ``.json`` suffix)
    :type name: str
    :raises FileNotFoundError: for an unknown name
    :return: Filesystem path to the JSON file
    :rtype: Path
    """

    stem = name.removesuffix(".json")
    if stem not in EXAMPLES:
        raise FileNotFoundError(f"no bundled problem named {name!r}")
    return Path(str(resources.files(__package__).joinpath(f"{stem}.json")))
