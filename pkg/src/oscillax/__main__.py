"""Allow ``python -m oscillax`` to behave exactly like the console script."""

import sys

from .cli_report import main

if __name__ == "__main__":
    sys.exit(main())
