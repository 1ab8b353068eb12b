"""
S-vine copula time-series processes: construction, simulation, fitting and diagnostics.
"""

__version__ = "0.1.0"
