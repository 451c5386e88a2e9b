"""Module entry point so the CLI runs via `python -m omnipoint_adapters`."""

import sys

from .cli import main

sys.exit(main())
