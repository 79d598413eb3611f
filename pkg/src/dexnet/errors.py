"""Exception hierarchy shared by all dexnet modules."""


class DexnetError(Exception):
    pass


class DataIntegrityError(DexnetError, ValueError):
    """Input records violate a dataset invariant (duplicate pools, self-loops, unknown ids)."""


class NotFoundError(DexnetError, LookupError):
    pass


class DegenerateInputError(DexnetError, ValueError):
    pass


class ConfigurationError(DexnetError):
    pass


class SchemaError(DexnetError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class ParseError(DexnetError, ValueError):
    def __init__(self, message, record_id=None):
        self.record_id = record_id
        super().__init__(f"record {record_id}: {message}" if record_id else message)


class TransportError(DexnetError):
    """Network failure talking to the subgraph endpoint. Retryable."""

    retryable = True

    def __init__(self, message, attempts):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")
