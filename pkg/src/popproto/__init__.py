"""Population-protocol simulation engine and analysis toolkit.

Simulates the leaderless phase clock, phased exact majority, phased
leader election and the four-state majority protocol over the uniform
random pairwise scheduler, and provides model-checking tools
(reachability, stable decisions, output dominance, bottleneck scanning
and suffix transition ordering) for explicit finite protocols.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
