"""Configuration module."""
# experiment_config imports core, which imports settings; keep this package import-light
from config.settings import *
