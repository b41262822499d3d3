"""Test suite for the nilkit library."""
