"""Allow ``python -m radlab`` as an alias for the ``radlab`` command."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
