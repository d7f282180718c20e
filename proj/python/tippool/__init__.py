"""Tip pool size model, simulator, quarantine pipeline and parent-count controller."""

from ._tippool import *  # noqa: F401,F403
from ._tippool import __doc__  # noqa: F401

__version__ = "0.1.0"
