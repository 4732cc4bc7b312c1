"""Shared exception types."""


class InvariantError(RuntimeError):
    """A computed quantity violated an internal invariant (e.g. an attack
    value exceeding the completeness cap). Maps to CLI exit code 3."""
