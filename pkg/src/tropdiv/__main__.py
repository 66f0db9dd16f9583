"""Module entry point: python3 -m tropdiv <subcommand> ..."""
import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
