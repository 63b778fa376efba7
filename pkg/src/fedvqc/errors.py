"""Exception hierarchy shared across the package."""


class FedVQCError(Exception):
    pass


class ConfigurationError(FedVQCError, ValueError):
    """Invalid configuration, shapes, or hyperparameters."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class OracleScopeError(FedVQCError, ValueError):
    pass


class NumericError(FedVQCError, ArithmeticError):
    pass


class IngestionError(FedVQCError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DatasetError(FedVQCError, ValueError):
    pass


class ProtocolError(FedVQCError):
    """A message violated the round protocol (mixed rounds, duplicates, bad sizes)."""


class TransportError(ProtocolError):
    """Framing-level failure: CRC mismatch, truncation, oversize, timeout."""


class RoundFailure(FedVQCError):
    pass
