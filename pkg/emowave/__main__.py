"""
Entrypoint module.

Used when using `python -m emowave` to invoke the CLI.
"""

import sys

from emowave.cli.cli import main

if __name__ == "__main__":
    sys.exit(main())
