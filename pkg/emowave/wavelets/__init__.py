"""Subpackage containing the wavelet filter bank and the discrete wavelet transform."""
