"""Tick-kernel backend selection.

The compiled Cython kernel is preferred when the extension built; the
pure-Python kernel is the drop-in fallback. Both produce bit-identical
results for the same inputs. Set MODALSIM_BACKEND=python|cython to force
one (forcing cython raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import tick_py

_forced = os.environ.get("MODALSIM_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = tick_py
else:
    try:
        from . import _tick_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _forced == "cython":
            raise ImportError(
                "MODALSIM_BACKEND=cython but the compiled kernel is not built; "
                "reinstall the package or drop the override"
            ) from None
        _impl = tick_py

BACKEND_NAME: str = _impl.BACKEND_NAME
tick_once = _impl.tick_once
satisfaction_pass = _impl.satisfaction_pass


def get_backend(name: str | None = None):
    """Return (tick_once, satisfaction_pass, backend_name) for ``name``.

    ``None`` means the active default. Used by the parity tests and the
    backend benchmark, which need both implementations side by side.
    """
    if name in (None, "", BACKEND_NAME):
        return tick_once, satisfaction_pass, BACKEND_NAME
    if name == "python":
        return tick_py.tick_once, tick_py.satisfaction_pass, "python"
    if name == "cython":
        from . import _tick_cy

        return _tick_cy.tick_once, _tick_cy.satisfaction_pass, "cython"
    raise ValueError(f"unknown backend {name!r}")
