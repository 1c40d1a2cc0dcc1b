"""Model checking and Q-learning for omega-regular reward machines."""

from ._omegarm import *  # noqa: F401,F403
from ._omegarm import __doc__  # noqa: F401
