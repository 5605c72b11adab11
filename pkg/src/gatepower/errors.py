"""Exception types shared across the package."""


class GatepowerError(Exception):
    """Base class for errors raised by gatepower."""


class CapacityError(GatepowerError):
    """An exhaustive operation was asked to enumerate more than it supports."""
