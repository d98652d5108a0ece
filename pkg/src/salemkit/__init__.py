"""Random fractal measures on rescaled lattices: constructions, exact checks and experiments."""

__version__ = "0.1.0"
