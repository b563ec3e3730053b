"""Hot-kernel backend selection.

The per-direction distance computation dominates the runtime of sphere
averages.  A compiled Cython implementation (_ckernels) is used when it was
built; otherwise the NumPy implementation (_pykernels) takes over with the
same contract.  Set RANDCLT_PURE_PYTHON=1 to force the fallback, e.g. for
benchmark comparisons (see benchmarks/bench_kernels.py).
"""

import os

from . import _pykernels

TARGET_NORMAL = _pykernels.TARGET_NORMAL
TARGET_SPHERE = _pykernels.TARGET_SPHERE
NORMAL_MEAN_ABS_GAP = _pykernels.NORMAL_MEAN_ABS_GAP

if os.environ.get("RANDCLT_PURE_PYTHON", "").strip().lower() in ("1", "true", "yes"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
batch_distances = _impl.batch_distances
weighted_distances = _pykernels.weighted_distances  # one-shot path, not hot
