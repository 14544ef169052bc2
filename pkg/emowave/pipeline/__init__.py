"""Subpackage containing the pipeline stages shared by the CLI commands."""
