"""Kernel backend selection.

The compiled extension is preferred when present; the numpy fallback is
bit-exact but slower. `FABRICSIM_BACKEND=python|compiled` forces a choice
(useful for the backend-comparison benchmark and for tests).
"""

from __future__ import annotations

import os

from . import _pykernels

_forced = os.environ.get("FABRICSIM_BACKEND")

if _forced == "python":
    impl = _pykernels
elif _forced == "compiled":
    from . import _ckernels as impl  # ImportError is the right failure here
elif _forced:
    raise RuntimeError(
        f"FABRICSIM_BACKEND={_forced!r} not recognized (use 'python' or 'compiled')"
    )
else:
    try:
        from . import _ckernels as impl
    except ImportError:
        impl = _pykernels

BACKEND_NAME: str = impl.BACKEND_NAME


def get_backend(name: str | None = None):
    """Return a backend module by name; None gives the active default."""
    if name is None:
        return impl
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
