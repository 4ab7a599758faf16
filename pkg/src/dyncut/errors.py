"""Exception types raised by the engine and its tooling."""


class DynCutError(Exception):
    """Base class for every error raised by this package."""


class PreconditionViolated(DynCutError):
    def __init__(self, op, reason):
        super().__init__(f"{op}: {reason}")
        self.op = op
        self.reason = reason


class UnknownVertex(DynCutError, KeyError):
    def __init__(self, v):
        super().__init__(f"unknown vertex {v!r}")
        self.vertex = v

    def __str__(self):
        return self.args[0]


class NonLiftableEdge(DynCutError):
    pass


class InfeasibleParameters(DynCutError):
    def __init__(self, msg, achieved=None):
        super().__init__(msg)
        self.achieved = achieved


class TooManyDeletions(DynCutError):
    pass


class TooManyTerminals(DynCutError):
    pass


class ParameterViolation(DynCutError):
    pass


class RebuildRequired(DynCutError):
    pass


class LevelCapExceeded(DynCutError):
    pass


class ScheduleExhausted(DynCutError):
    pass


class InternalInconsistency(DynCutError):
    pass


class TooLarge(DynCutError):
    pass


class ParseError(DynCutError):
    def __init__(self, line_no, msg):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class ConfigError(DynCutError):
    pass


class SizeCapExceeded(DynCutError):
    pass
