"""Closed hub-and-satellite network toolkit (compiled core in hubnet._core)."""

from ._core import *  # noqa: F401,F403
from ._core import Distribution, DomainError, NumericError  # noqa: F401
