"""Core application module."""
from core.error_handler import *
from core.group_core import *
from core.mixed_words import *
from core.hyp_geom import *

__all__ = [
    'error_handler',
    'group_core',
    'mixed_words',
    'hyp_geom',
    'random_walk',
    'mif_engine',
    'calibration',
    'reports',
    'figures',
    'cli'
]
