"""Exception hierarchy shared by all modules."""


class CayleyQMCError(Exception):
    """Base class for computation failures (CLI exit status 1)."""


class ParamError(CayleyQMCError, ValueError):
    """Model or call parameter outside its admissible range."""


class DomainError(CayleyQMCError, ValueError):
    """Argument outside the domain of a map (e.g. ratio bound of the planar map)."""


class RegimeError(CayleyQMCError):
    """Quantity requested in a temperature regime where it does not exist."""


class CapacityError(CayleyQMCError):
    """Exact enumeration would exceed the configured site cap."""


class SupportError(CayleyQMCError):
    """Observable touches sites outside the finite volume."""
