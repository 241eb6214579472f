class ValidationError(ValueError):
    """Raised for malformed chains, formulas, queries or model files."""


class QuerySyntaxError(ValidationError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
