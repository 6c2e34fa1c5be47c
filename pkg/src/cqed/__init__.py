"""Charge-qubit / circuit-QED simulation library.

Charge-basis Cooper-pair-box and transmon spectra, SQUID flux tuning,
classical junction-pendulum dynamics, generalized Jaynes-Cummings coupling
to a readout resonator, and dispersive transmission spectra, with a batch
CLI (`cqed`) that writes CSV/JSON sweep tables.
"""

__version__ = "0.1.0"
