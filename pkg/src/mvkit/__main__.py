"""Allow `python -m mvkit ...` as an alias for the `mvkit` script."""

import sys

from .cli import main

sys.exit(main())
