"""Exception hierarchy shared by every eigenpro module."""


class EigenProError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(EigenProError, ValueError):
    """Arguments violate a documented precondition (shape, range, ...)."""


class DegenerateInputError(InvalidInputError):
    """Input is well-formed but numerically degenerate (e.g. zero covariance)."""


class DataError(EigenProError):
    """A data file could not be parsed or contains non-finite values."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class DivergenceError(EigenProError, ArithmeticError):
    """Training loss blew up; carries the step size that caused it."""

    def __init__(self, eta, epoch, loss, initial_loss):
        self.eta = eta
        self.epoch = epoch
        self.loss = loss
        self.initial_loss = initial_loss
        super().__init__(
            f"training diverged at epoch {epoch} with step size eta={eta:.6g} "
            f"(loss {loss:.6g} vs initial {initial_loss:.6g}); try a smaller eta"
        )
