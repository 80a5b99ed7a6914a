"""Canonical heights, degeneration and bifurcation loci for algebraic families
of rational maps over Q(t)."""

from heightlab.dynamics import canonical_height, classify, degree_sequence, orbit
from heightlab.family import RationalMapFamily, apply, degenerate_places, make_family
from heightlab.parser import parse_family, parse_point

__all__ = [
    "RationalMapFamily",
    "apply",
    "canonical_height",
    "classify",
    "degenerate_places",
    "degree_sequence",
    "make_family",
    "orbit",
    "parse_family",
    "parse_point",
]
