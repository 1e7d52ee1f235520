"""Figure rendering for gossip-bandits experiment CSVs."""

from .render import KINDS, SchemaError, render

__all__ = ["KINDS", "SchemaError", "render"]
