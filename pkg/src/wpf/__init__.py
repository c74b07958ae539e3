"""Black-box algebra toolkit: straight-line programs, relation-finding attacks
and weak pseudo-freeness games at desk scale."""

__version__ = "0.1.0"
