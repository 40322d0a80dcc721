"""Score-based learning of Gaussian DAGs via penalized least squares."""

from ._sbdag import *  # noqa: F401,F403
from ._sbdag import __doc__ as _doc

__doc__ = _doc
