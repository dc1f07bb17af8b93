"""Glauber dynamics, log-Sobolev constants and influence inequalities for finite Markov random fields."""

__version__ = "0.1.0"
