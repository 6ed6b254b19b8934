"""Self-testing analysis of exclusivity-graph contextuality inequalities."""

__version__ = "0.1.0"
