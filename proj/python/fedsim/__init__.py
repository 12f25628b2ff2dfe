"""Federated-averaging simulator with Fisher-trace metrics."""

from fedsim._core import *  # noqa: F401,F403
from fedsim._core import __version__  # noqa: F401
