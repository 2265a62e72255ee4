"""Carnot-group hypersurface geometry toolkit (C++ core bindings)."""

try:
    from ._carnot import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:
    from _carnot import *  # noqa: F401,F403  (in-tree build layout)
