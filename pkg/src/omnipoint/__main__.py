"""Module entry point so the CLI runs via `python -m omnipoint`."""

import sys

from .cli import main

sys.exit(main())
