"""Hamiltonian flows and semiclassical measures for conormal potentials."""

from ._conoflow import *  # noqa: F401,F403
from ._conoflow import ConoflowError, __doc__  # noqa: F401
