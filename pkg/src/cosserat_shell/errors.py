class ShellError(Exception):
    """Base class for all library errors."""


class NotSkew(ShellError):
    pass


class Degenerate(ShellError):
    pass


class RankDeficient(ShellError):
    pass


class Inadmissible(ShellError):
    pass


class UnknownSurface(ShellError):
    pass


class SingularSystem(ShellError):
    pass


class InvalidBCs(ShellError):
    pass


class LineSearchStalled(ShellError):
    pass


class ConfigError(ShellError):
    """Raised for unparseable or invalid run configurations."""
