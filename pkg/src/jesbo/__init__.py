"""Gaussian-process Bayesian optimization with joint entropy search.

Subpackages cover exact GP regression with rank-1 updates (``gp``),
truncated-Gaussian utilities (``gaussmath``), approximate Thompson sampling
of optimum pairs via random Fourier features (``optima``), the JES/MES/EI
acquisition functions (``acquisitions``), the optimization loop
(``engine``), benchmark objectives (``tasks``), and the experiment harness
(``harness``, driven by the ``jesbo`` CLI).

Hot numeric kernels run on a compiled extension when available, with a
NumPy fallback chosen at import time (see ``jesbo._backend.BACKEND``).
"""

from ._backend import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
