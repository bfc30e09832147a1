"""Bounding-box object segmentation for tracker initialisation."""

try:
    from bbinit._bbinit import *  # noqa: F401,F403
    from bbinit._bbinit import __doc__  # noqa: F401
except ImportError:  # extension on PYTHONPATH next to the sources
    from _bbinit import *  # noqa: F401,F403
    from _bbinit import __doc__  # noqa: F401
