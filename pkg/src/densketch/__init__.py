"""Streaming sketches and brute-force oracles for dense Max-Cut, Densest Subgraph
and Max-CSP, plus the finite pieces of the matching space lower bounds."""
from .f0 import F0Params, F0Sketch
from .optimizers import DenseRunConfig, OptResult
from .universe import CapExceeded, Cut, EdgeUniverse, Graph, RejectedInput, UndefinedValue

__version__ = "0.1.0"

__all__ = ["F0Params", "F0Sketch", "DenseRunConfig", "OptResult", "CapExceeded", "Cut",
           "EdgeUniverse", "Graph", "RejectedInput", "UndefinedValue"]
