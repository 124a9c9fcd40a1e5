"""Stationary boundary layers and their stability for the half-space outflow problem."""
__version__ = "0.1.0"
