"""Synthesis of deployable priorities for interacting components under a
restricted communication architecture."""
from .fixer import SynthesisResult, synthesize
from .model import CommArchitecture, System, load_system, parse_system

__all__ = ["CommArchitecture", "SynthesisResult", "System", "load_system", "parse_system", "synthesize"]
__version__ = "0.1.0"
