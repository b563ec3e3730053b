"""randclt: distances, expansions, and two-sided bounds for weighted sums
<X, theta> averaged over the unit sphere, with the concrete orthonormal
systems (trigonometric, cosine, Chebyshev, shifted-periodic, Walsh,
empirical, lacunary) as test beds.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
from .systems import System, make_system  # noqa: F401
