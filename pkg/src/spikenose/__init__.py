"""Hybrid spiking-convolutional / variational-Bayesian gas classifier."""

__version__ = "0.1.0"
