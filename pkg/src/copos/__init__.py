"""Copositive-programming bounds on the stability number of graphs."""
from .graphs import Graph, alpha_exact, generate_family, m_matrix
from .polynomials import HomPoly

__version__ = "0.1.0"

__all__ = ["Graph", "HomPoly", "alpha_exact", "generate_family", "m_matrix", "__version__"]
