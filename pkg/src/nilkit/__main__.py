"""Allow ``python -m nilkit``."""

from nilkit.cli.main import main

raise SystemExit(main())
