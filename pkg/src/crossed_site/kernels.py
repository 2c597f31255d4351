"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``CROSSED_SITE_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback

_NAMES = (
    "lehmer_rank",
    "signed_keys",
    "weyl_restrict",
    "weyl_act",
    "signed_mul_table",
    "stable_table",
    "weyl_members_level",
    "cgii_check",
    "action_check",
    "cgi_check",
    "presheaf_check",
)

try:
    if os.environ.get("CROSSED_SITE_BACKEND", "").lower() == "python":
        raise ImportError("fallback forced")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def backend_module(name: str | None = None):
    """The kernel module for ``name`` ("compiled" or "python"), default current."""
    name = name or BACKEND
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    if name == "python":
        return _fallback
    raise ValueError(f"unknown backend {name!r}")


_impl = backend_module()
for _n in _NAMES:
    globals()[_n] = getattr(_impl, _n)

__all__ = ["BACKEND", "backend_module", *_NAMES]
