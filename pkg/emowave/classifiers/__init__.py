"""Subpackage containing the kNN and RNN classifiers."""
