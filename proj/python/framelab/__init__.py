"""Perturbation laboratory for frames in finite-dimensional l^p spaces."""

from ._framelab import *  # noqa: F401,F403
from ._framelab import __doc__  # noqa: F401
