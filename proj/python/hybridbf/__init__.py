"""Hybrid digital/analog beamforming design (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
