"""Simulation preorders, simulation quotients and antichain language checks
for word, tree and alternating Büchi automata."""

__version__ = "0.1.0"
