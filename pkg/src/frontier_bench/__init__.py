"""Two-stage efficiency benchmarking: DEA scoring plus second-stage regression."""

__version__ = "0.1.0"
