"""Module entry point: python -m gplb <mode> [flags]."""

from .harness.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
