"""
emowave package.

Classify emotional states from four-channel EEG with wavelet features, a Minkowski kNN and a
recurrent network.
"""

# flake8: noqa

from . import exceptions
from .pipeline.config import PipelineConfig
from .pipeline.stages import run_pipeline
