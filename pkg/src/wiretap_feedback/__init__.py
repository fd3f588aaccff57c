"""Secrecy rates and scheme simulations for modulo-additive wiretap channels
with noisy feedback from the destination."""

__version__ = "0.1.0"
