"""Command-line entrypoint.

Thin wrapper so the solver can be run from a checkout without installing:

    python main.py solve dcdual/fixtures/example1.json --out results.json
"""

from dcdual.cli import main

__all__ = ["main"]


if __name__ == "__main__":
    raise SystemExit(main())
