"""Command-line front end for nilkit.

The entry point is ``nilkit.cli.main.main``; configuration handling lives in
``nilkit.cli.config``.
"""
