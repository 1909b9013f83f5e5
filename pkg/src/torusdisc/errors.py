"""Exception hierarchy shared by all torusdisc modules."""


class TorusDiscError(Exception):
    """Base class for all torusdisc errors."""


class CapacityError(TorusDiscError):
    """A size, memory, or scale budget was exceeded."""

    def __init__(self, message, required=None, available=None):
        super().__init__(message)
        self.required = required
        self.available = available


class DomainError(TorusDiscError, ValueError):
    """An argument is outside the operation's domain."""


class UnknownNameError(TorusDiscError, KeyError):
    """A name lookup failed; carries the valid alternatives."""

    def __init__(self, name, valid):
        self.name = name
        self.valid = sorted(valid)
        super().__init__(f"unknown name {name!r}; valid names: {', '.join(self.valid)}")

    def __str__(self):
        return self.args[0]


class TilingError(TorusDiscError, ValueError):
    """A divisibility requirement between grid resolutions failed."""


class MatchingError(TorusDiscError):
    """No perfect matching exists; carries a Hall-violating witness set."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = sorted(witness)


class SearchError(TorusDiscError):
    """A bounded search came up empty; carries the best value found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(TorusDiscError, ValueError):
    """A configuration document failed validation; carries the field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
