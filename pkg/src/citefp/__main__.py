"""Allow ``python -m citefp`` as an alias for the ``citefp`` script."""

import sys

from .cli import main

sys.exit(main())
