"""Exception hierarchy shared by the solvers and the CLI."""


class PettyError(Exception):
    """Base class for every error raised by this package."""


class InputError(PettyError, ValueError):
    """Caller supplied something outside an operation's preconditions."""


class SolverError(PettyError, RuntimeError):
    """A numeric routine failed on input that satisfied its preconditions."""


class OracleError(SolverError):
    """Body oracle is unbounded or inconsistent."""


class BracketNotFound(SolverError):
    """IVT bracket search found no sign change."""


class NoInscribedHomothet(SolverError):
    """Multi-start search found no inscribed homothet (existence may fail for non-smooth bodies)."""


class SectionTrivial(SolverError):
    def __init__(self, message, t_bounds=None):
        super().__init__(message)
        self.t_bounds = t_bounds


class SweepBracketFailure(SolverError):
    def __init__(self, message, sweep=None):
        super().__init__(message)
        self.sweep = sweep


class SmoothingFailed(SolverError):
    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class CellBudgetExceeded(SolverError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
