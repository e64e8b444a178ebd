"""Virtual lab for a stochastic binary memristive synapse.

Thin re-export of the compiled core; see the project README for the model
and the command line interface.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
