"""Command line entry point, run as ``python -m celab.lab``."""
import sys

from .cli import main

sys.exit(main())
