"""Select the kernel implementation at import.

``SPC_BACKEND=python`` forces the numpy kernels; otherwise the compiled
extension is used when it imports.
"""

import os

from . import _kernels_py

kernels = _kernels_py
if os.environ.get("SPC_BACKEND", "").lower() not in ("python", "py", "numpy"):
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND
