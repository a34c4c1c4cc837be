"""envkit: authoring kit and protocol server for verifiable environments."""

from .base import VerifiableTask, parse_int, parse_int_list

__version__ = "0.1.0"

__all__ = ["VerifiableTask", "parse_int", "parse_int_list", "__version__"]
