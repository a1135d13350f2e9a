"""Python access to the echolab C++ core."""

from ._echolab import *  # noqa: F401,F403
from ._echolab import __version__  # noqa: F401
