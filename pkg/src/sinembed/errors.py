"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class GuardError(RuntimeError):
    """A desk-scale guard (instance size, overflow cap) was exceeded."""
