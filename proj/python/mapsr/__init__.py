"""Prompt-driven land-cover map super-resolution."""

from ._mapsr import *  # noqa: F401,F403
from ._mapsr import __doc__ as _core_doc  # noqa: F401
