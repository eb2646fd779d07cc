from enum import Enum


class MeasureKind(Enum):
    """How the vertex measure μ of a graph is chosen.

    - UNIT: μ ≡ 1
    - NORMALIZED: μ(x) = m(x), the total weight of edges at x
    - EXPLICIT: μ given per vertex
    """
    UNIT = "unit"
    NORMALIZED = "normalized"
    EXPLICIT = "explicit"


class Support(Enum):
    """Declared support of a vertex function."""
    VERTICES = "vertices"
    OMEGA = "omega"
    INTERIOR = "interior"
