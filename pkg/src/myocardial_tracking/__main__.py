"""Entry point for ``python -m myocardial_tracking``."""

import sys

from .cli import main

sys.exit(main())
