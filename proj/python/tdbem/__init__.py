"""Time-domain Galerkin boundary elements for the wave equation on screens."""

from ._tdbem import *  # noqa: F401,F403
from ._tdbem import __doc__  # noqa: F401
