"""celab.__main__: ``python -m celab`` runs the lab CLI."""
import sys

from .lab.cli import main

sys.exit(main())
