"""Numerical core with backend selection.

The compiled Cython extension is preferred when it built successfully;
otherwise the pure-numpy fallback is used.  ``RELAXLS_PURE_PYTHON=1``
forces the fallback.  ``use_backend`` rebinds the kernels at runtime
(used by the benchmark and the backend-equivalence tests).
"""

import os

from . import _fallback

_BACKENDS = {"fallback": _fallback}
try:
    from . import _speedups

    _BACKENDS["speedups"] = _speedups
except ImportError:
    _speedups = None

if os.environ.get("RELAXLS_PURE_PYTHON") or _speedups is None:
    _impl = _fallback
else:
    _impl = _speedups

adj_det = _impl.adj_det
sym_eigmax = _impl.sym_eigmax
ct_rates = _impl.ct_rates
dt_ls_update = _impl.dt_ls_update


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return "speedups" if _impl is _speedups else "fallback"


def get_backend(name):
    return _BACKENDS[name]


def use_backend(name):
    """Switch the active kernel backend; returns the previous backend name."""
    global _impl, adj_det, sym_eigmax, ct_rates, dt_ls_update
    previous = backend_name()
    _impl = _BACKENDS[name]
    adj_det = _impl.adj_det
    sym_eigmax = _impl.sym_eigmax
    ct_rates = _impl.ct_rates
    dt_ls_update = _impl.dt_ls_update
    return previous
