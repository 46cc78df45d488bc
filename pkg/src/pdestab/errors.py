"""Exception hierarchy shared by all modules."""


class PdestabError(Exception):
    pass


class ExprError(PdestabError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownNameError(ExprError):
    pass


class UnboundVariableError(ExprError):
    pass


class DomainError(ExprError):
    pass


class AssumptionError(PdestabError):
    """A hypothesis required by a construction does not hold."""


class QuadratureError(PdestabError):
    pass


class BlowUpError(PdestabError):
    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class SolverError(PdestabError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class PreconditionError(PdestabError):
    pass


class ConfigError(PdestabError):
    pass
