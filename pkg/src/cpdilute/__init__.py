"""Contact processes on randomly diluted graphs: generation, structure,
simulation, closed-form theory, exact small-instance oracles, and an
experiment harness."""

from . import cpsim, graphs, harness, oracle, percolate, theory

__all__ = ["cpsim", "graphs", "harness", "oracle", "percolate", "theory"]
__version__ = "0.1.0"
