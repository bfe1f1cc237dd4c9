"""Rigidity, flexibility and jamming of planar sticky-disk packings."""

from .errors import StickyDiskError
from .packing import ContactGraph, DiskPacking, Tolerances, contact_graph, load, save, validate

__all__ = ["ContactGraph", "DiskPacking", "StickyDiskError", "Tolerances", "contact_graph", "load", "save", "validate"]
__version__ = "0.1.0"
