"""Binding-side errors.

Simulator errors pass through unchanged (they already carry the diagnostic
text); the two extra classes below cover failures that only exist on the
scripting side of the boundary.
"""


class HostBindingError(Exception):
    """Base class for binding-side failures."""


class MissingNativeLibraryError(HostBindingError):
    """The simulation package that backs the bindings is not importable."""


class ClosedHandleError(HostBindingError):
    """Operation on a released overlay handle."""
