"""Enumeration kernels with a compiled fast path.

Two exhaustive kernels back the brute-force cross-checks and searches: full
joint enumeration over a small Bayesian network, and inclusion-mask
enumeration over perforated action traces simulated as 64-bit world
bitmaps.  A Cython extension provides the fast path; a vectorized NumPy
implementation with identical semantics is selected when the extension is
unavailable or when RETRACE_PURE is set to a non-empty value other than 0.
BACKEND names the active implementation.
"""

import os

if os.environ.get("RETRACE_PURE", "").strip() not in ("", "0"):
    from . import pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        from . import pure as _impl

        BACKEND = "pure"

enumerate_posterior = _impl.enumerate_posterior
enumerate_traces = _impl.enumerate_traces

__all__ = ["BACKEND", "enumerate_posterior", "enumerate_traces"]
