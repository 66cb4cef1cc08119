"""Associative submanifolds of the squashed 7-sphere: structures, classification, deformations."""

__version__ = "0.1.0"

__all__ = ["exterior", "model_structures", "sasakian", "squashed", "symmetry",
           "classification", "deformation", "twistor", "cli"]
