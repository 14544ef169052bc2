"""Subpackage containing the wavelet statistics and the fused feature vectors."""
