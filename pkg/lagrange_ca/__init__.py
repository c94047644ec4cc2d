"""Lagrangian cellular-automaton simulator with a particle interaction model."""

__version__ = "0.1.0"
