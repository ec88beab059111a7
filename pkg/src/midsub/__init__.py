"""General midpoint subdivision on quad meshes and smoothness certification."""

__version__ = "0.1.0"
