"""Generalised Bell-test numerics for OAM-entangled photon pairs."""

from ._qbell import *  # noqa: F401,F403
from ._qbell import __version__  # noqa: F401
