"""Kernel backend selection.

Prefers the compiled Cython kernels; falls back to the numpy versions when
the extension was not built. Set ``CHAINGREEDY_BACKEND=python`` or
``=compiled`` to force a choice (the latter raises if the extension is
missing, which is useful in benchmarks and CI).
"""

from __future__ import annotations

import os

from . import pykernels

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

HAVE_COMPILED = _compiled is not None

_forced = os.environ.get("CHAINGREEDY_BACKEND", "").strip().lower()
if _forced and _forced not in ("compiled", "python"):
    raise ImportError(
        f"CHAINGREEDY_BACKEND={_forced!r} not understood; use 'compiled' or 'python'"
    )
if _forced == "compiled" and not HAVE_COMPILED:
    raise ImportError(
        "CHAINGREEDY_BACKEND=compiled but the extension module is not built"
    )

if _forced == "python" or not HAVE_COMPILED:
    _active = pykernels
    BACKEND_NAME = "python"
else:
    _active = _compiled
    BACKEND_NAME = "compiled"

clique_pmf_by_enumeration = _active.clique_pmf_by_enumeration
coverage_chain_greedy = _active.coverage_chain_greedy


def backend_name() -> str:
    """Name of the backend serving the kernel calls: 'compiled' or 'python'."""
    return BACKEND_NAME
