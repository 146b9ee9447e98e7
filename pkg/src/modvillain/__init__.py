"""Modified Villain lattice gauge theory on cubical complexes."""

__version__ = "0.1.0"
