"""Map-free relocalization estimators and benchmark metrics."""

from ._mapfree import *  # noqa: F401,F403

__version__ = "0.1.0"
