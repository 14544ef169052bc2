"""Subpackage containing the EEG recording model, CSV loading and segmentation."""
