"""Lazy loader for the native simulation package."""

from .errors import MissingNativeLibraryError

try:
    import fabricsim as _fabricsim
except ImportError:
    _fabricsim = None


def native():
    if _fabricsim is None:
        raise MissingNativeLibraryError(
            "the 'fabricsim' simulation package is not installed; the bindings "
            "have no backend to drive. Install it first, e.g.\n"
            "    pip install -e <repo-root>  (the package that provides 'fabricsim')\n"
            "then re-run this script."
        )
    return _fabricsim
