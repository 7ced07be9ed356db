"""Python interface to the biphos numerical workbench.

Everything lives in the compiled core: parameter handling, deterministic and
stochastic integration of the reduced and growth systems, phase-plane tools,
pseudo-arclength continuation, and the noise-robustness statistics.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
