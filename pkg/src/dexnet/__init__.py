"""Uniswap V2 token network analysis."""

from .model import LiquidityGraph, build_graph

__version__ = "0.1.0"
__all__ = ["LiquidityGraph", "build_graph", "__version__"]
