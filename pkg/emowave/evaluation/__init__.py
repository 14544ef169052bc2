"""Subpackage containing the evaluation metrics and the report renderers."""
