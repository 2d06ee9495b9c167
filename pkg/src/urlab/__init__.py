"""Numerical toolkit for quantum uncertainty relations.

Builds truncated-Fock, spin and quasi-spin operators and states, computes
uncertainty/commutator/Gram matrices, and evaluates the catalog of
uncertainty inequalities together with the principal-minor machinery that
generates relations for several observables and several states.
"""

from urlab.verdict import URVerdict

__version__ = "0.1.0"

__all__ = ["URVerdict", "__version__"]
