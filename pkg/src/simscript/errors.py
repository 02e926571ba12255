"""Exception hierarchy shared across the framework.

Every error raised by the public API derives from :class:`FrameworkError`
and exposes a stable ``kind`` string (the class name) that the script
interpreter and the HTTP service report verbatim.
"""

from __future__ import annotations


class FrameworkError(Exception):
    """Base class for all framework-defined errors."""

    @property
    def kind(self) -> str:
        return getattr(type(self), "kind_name", type(self).__name__)


# --- registry / descriptor -------------------------------------------------

class DuplicateRoot(FrameworkError):
    pass


class InvalidName(FrameworkError):
    pass


class PathNotFound(FrameworkError):
    pass


class IndexOutOfRange(FrameworkError):
    pass


class NotAScalar(FrameworkError):
    pass


class ArityMismatch(FrameworkError):
    pass


class MethodPanicked(FrameworkError):
    pass


class UnregisteredRoot(FrameworkError):
    pass


class ParseError(FrameworkError):
    """A text value does not parse as the required kind."""

    def __init__(self, kind: str, text: str):
        super().__init__(f"cannot parse {text!r} as {kind}")
        self.value_kind = kind
        self.text = text


# --- script interpreter ----------------------------------------------------

class ScriptError(FrameworkError):
    """Base for tokenizer/interpreter errors; carries a source line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnbalancedBrace(ScriptError):
    pass


class UnbalancedBracket(ScriptError):
    pass


class UnterminatedQuote(ScriptError):
    pass


class UnknownVariable(ScriptError):
    pass


class UnknownCommand(ScriptError):
    pass


class ExecFailed(ScriptError):
    pass


# --- expression evaluator --------------------------------------------------

class ExprSyntaxError(FrameworkError):
    """Documented externally as SyntaxError (name avoids the builtin)."""

    kind_name = "SyntaxError"


class DivisionByZero(FrameworkError):
    pass


class ExprTypeError(FrameworkError):
    """Documented externally as TypeError (name avoids the builtin)."""

    kind_name = "TypeError"


# --- checkpoint ------------------------------------------------------------

class BadMagic(FrameworkError):
    pass


class UnsupportedVersion(FrameworkError):
    pass


class TypeMismatch(FrameworkError):
    pass


class TruncatedImage(FrameworkError):
    pass


# --- runtime / graph -------------------------------------------------------

class InvalidWorkerCount(FrameworkError):
    pass


class WorkerError(FrameworkError):
    """Aggregates failures from a broadcast, one entry per failed rank."""

    def __init__(self, failures: list[tuple[int, str]]):
        detail = "; ".join(f"rank {r}: {m}" for r, m in failures)
        super().__init__(f"broadcast failed on {len(failures)} worker(s): {detail}")
        self.failures = failures


class UnknownSeries(FrameworkError):
    pass


class EmptyGraph(FrameworkError):
    pass


class RankCountMismatch(FrameworkError):
    pass


class MissingWeight(FrameworkError):
    pass


class AgentUpdateError(FrameworkError):
    def __init__(self, rank: int, agent_id: int, cause: BaseException):
        super().__init__(f"agent {agent_id} on rank {rank}: {cause}")
        self.rank = rank
        self.agent_id = agent_id
        self.cause = cause
