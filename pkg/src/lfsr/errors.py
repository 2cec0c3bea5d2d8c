"""Exception hierarchy shared by all lfsr modules."""


class LFError(Exception):
    """Base class for every error raised by lfsr."""


class ViewIndexError(LFError, IndexError):
    pass


class EmptySlotError(LFError, KeyError):
    def __str__(self):
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class DimensionError(LFError, ValueError):
    pass


class SceneError(LFError, ValueError):
    pass


class PatternError(LFError, ValueError):
    pass


class PlanError(LFError, ValueError):
    pass


class InterpolationError(LFError, RuntimeError):
    """Raised when synthesizing a view fails; carries the step id if known."""

    def __init__(self, message, step_id=None, diagnostics=""):
        self.step_id = step_id
        self.diagnostics = diagnostics
        prefix = f"step {step_id}: " if step_id is not None else ""
        super().__init__(prefix + message)


class MetricsError(LFError, ValueError):
    pass


class DatasetError(LFError, ValueError):
    pass


class FormatError(LFError, ValueError):
    """Parse error in one of the text formats, with a 1-based line number."""

    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
