"""Spacelike surfaces in Lorentzian 4-dimensional space forms and their twistor lifts."""

__version__ = "0.1.0"
