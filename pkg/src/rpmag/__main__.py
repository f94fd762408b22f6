"""Run the rpmag command-line interface via ``python -m rpmag``."""
import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
