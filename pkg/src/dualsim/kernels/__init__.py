"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension (``_ckernels``, Cython) and the pure-Python module
(``_pykernels``) implement the same five entry points with identical
signatures, sampling contracts and status codes; which one backs the package
is decided once, at import time.  Set the environment variable
``DUALSIM_FORCE_PURE`` to any non-empty value to skip the extension (useful
for benchmarking and for exercising the fallback in tests).

Per-seed reproducibility is guaranteed within a backend, not across the two:
the compiled backend draws from xoshiro256** seeded via splitmix64, the pure
backend from ``random.Random``.
"""

import os

if os.environ.get("DUALSIM_FORCE_PURE"):
    from . import _pykernels as backend

    BACKEND_NAME = "pure-python (forced)"
else:
    try:
        from . import _ckernels as backend  # type: ignore[no-redef]

        BACKEND_NAME = "cython"
    except ImportError:
        from . import _pykernels as backend  # type: ignore[no-redef]

        BACKEND_NAME = "pure-python"

rk4_growth = backend.rk4_growth
rk4_kuznetsov = backend.rk4_kuznetsov
ssa = backend.ssa
ssa_frozen = backend.ssa_frozen
tau_leap = backend.tau_leap

# Status codes returned by every kernel.
ST_OK = 0
ST_BLOWUP = 1
ST_EXTINCT = 2
ST_CAP = 3
ST_MAX_EVENTS = 4
ST_NEG_RATE = 5
ST_STEP_FAIL = 6

# Rate-law codes understood by the channel-table simulators.
R_CONST = 0
R_POW_T = 1
R_TLOGT = 2
R_LIN_E = 3
R_MASS_TE = 4
R_MM_TE = 5

__all__ = [
    "backend",
    "BACKEND_NAME",
    "rk4_growth",
    "rk4_kuznetsov",
    "ssa",
    "ssa_frozen",
    "tau_leap",
    "ST_OK",
    "ST_BLOWUP",
    "ST_EXTINCT",
    "ST_CAP",
    "ST_MAX_EVENTS",
    "ST_NEG_RATE",
    "ST_STEP_FAIL",
    "R_CONST",
    "R_POW_T",
    "R_TLOGT",
    "R_LIN_E",
    "R_MASS_TE",
    "R_MM_TE",
]
