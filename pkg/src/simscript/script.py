"""The embedded command language.

Scripts are sequences of commands, one per line (or ``;``-separated).
Words split on unquoted whitespace; ``{...}`` groups a word literally
(braces nest, no substitution), ``"..."`` groups with substitution, and
within ordinary words ``[command]`` and ``$name`` are substituted at
evaluation time.  ``#`` starts a comment where a word would begin.

Besides the builtins (`set`, `puts`, `if`, `while`, `expr`, `source`,
`exit`, `incr`, `file exists`, `exec`, `cputime`, `plot`, `parallel`),
every registered object path is a command: zero arguments read a field,
one argument writes it, and method paths invoke with their declared arity.
"""

from __future__ import annotations

import functools
import subprocess
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, TextIO

from . import expr as expr_mod
from . import values
from .descriptor import CompoundNode, FieldNode, MethodNode, Registry
from .errors import (
    ArityMismatch,
    ExecFailed,
    FrameworkError,
    NotAScalar,
    ParseError,
    ScriptError,
    UnbalancedBrace,
    UnbalancedBracket,
    UnknownCommand,
    UnknownVariable,
    UnterminatedQuote,
)

_WORD_END = " \t\n;"
_VAR_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


class ScriptExit(Exception):
    """Raised by the `exit` builtin; carries the process exit code."""

    def __init__(self, code: int = 0):
        super().__init__(f"exit {code}")
        self.code = code


@dataclass
class Word:
    text: str
    braced: bool
    line: int


@dataclass
class ParsedCommand:
    words: list[Word]
    line: int


# --- tokenizer -----------------------------------------------------------

def parse_script(text: str) -> list[ParsedCommand]:
    """Split script text into commands of words, tracking line numbers."""
    commands: list[ParsedCommand] = []
    words: list[Word] = []
    line = 1
    i = 0
    n = len(text)

    def end_command() -> None:
        nonlocal words
        if words:
            commands.append(ParsedCommand(words, words[0].line))
            words = []

    while i < n:
        c = text[i]
        if c in " \t":
            i += 1
        elif c == "\n":
            line += 1
            i += 1
            end_command()
        elif c == ";":
            i += 1
            end_command()
        elif c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "{":
            word, i, line = _scan_braced(text, i, line)
            words.append(word)
            if i < n and text[i] not in _WORD_END:
                raise UnbalancedBrace("extra characters after close-brace", line)
        elif c == '"':
            word, i, line = _scan_quoted(text, i, line)
            words.append(word)
            if i < n and text[i] not in _WORD_END:
                raise UnterminatedQuote("extra characters after closing quote", line)
        else:
            word, i, line = _scan_bare(text, i, line)
            words.append(word)
    end_command()
    return commands


def _scan_braced(text: str, i: int, line: int) -> tuple[Word, int, int]:
    start_line = line
    depth = 1
    j = i + 1
    while j < len(text):
        c = text[j]
        if c == "\n":
            line += 1
        elif c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return Word(text[i + 1:j], True, start_line), j + 1, line
        j += 1
    raise UnbalancedBrace("missing close-brace", start_line)


def _scan_quoted(text: str, i: int, line: int) -> tuple[Word, int, int]:
    start_line = line
    j = i + 1
    while j < len(text):
        c = text[j]
        if c == "\n":
            line += 1
        elif c == '"':
            return Word(text[i + 1:j], False, start_line), j + 1, line
        j += 1
    raise UnterminatedQuote("missing closing quote", start_line)


def _scan_bare(text: str, i: int, line: int) -> tuple[Word, int, int]:
    start_line = line
    depth = 0
    j = i
    while j < len(text):
        c = text[j]
        if depth == 0 and c in _WORD_END:
            break
        if c == "\n":
            line += 1
        elif c == "[":
            depth += 1
        elif c == "]" and depth > 0:
            depth -= 1
        j += 1
    if depth > 0:
        raise UnbalancedBracket("missing close-bracket", start_line)
    return Word(text[i:j], False, start_line), j, line


def tokenize(line: str) -> list[str]:
    """Raw words of the first command in `line`."""
    commands = parse_script(line)
    return [w.text for w in commands[0].words] if commands else []


# --- environment -----------------------------------------------------------

class Environment:
    """One interpreter's state: variables, output sink, command wiring."""

    def __init__(self, registry: Registry | None = None,
                 output: TextIO | None = None,
                 series: "Any | None" = None,
                 workdir: "Path | str | None" = None):
        from .runtime import SeriesStore  # runtime imports us; import lazily
        self.variables: dict[str, str] = {}
        self.registry = registry
        self.output: TextIO = output if output is not None else sys.stdout
        self.series = series if series is not None else SeriesStore()
        self.workdir = Path(workdir) if workdir is not None else Path.cwd()
        self.runtime: Any | None = None
        self.cputime: Callable[[], float] = time.process_time
        self.series_x: Callable[[], float] | None = None
        self.service_queue: Any | None = None
        self.in_broadcast = False
        self._parse_cache: dict[str, list[ParsedCommand]] = {}

    def parse(self, text: str) -> list[ParsedCommand]:
        cached = self._parse_cache.get(text)
        if cached is None:
            cached = parse_script(text)
            self._parse_cache[text] = cached
        return cached

    def resolve_path(self, arg: str) -> Path:
        p = Path(arg)
        return p if p.is_absolute() else self.workdir / p

    def drain_service(self) -> None:
        q = self.service_queue
        if q is not None:
            q.drain()


# --- substitution ------------------------------------------------------------

def substitute(word: str, env: Environment) -> str:
    """Expand ``[command]`` and ``$name`` left to right, single pass."""
    out: list[str] = []
    i = 0
    n = len(word)
    while i < n:
        c = word[i]
        if c == "[":
            depth = 1
            j = i + 1
            while j < n:
                if word[j] == "[":
                    depth += 1
                elif word[j] == "]":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if depth != 0:
                raise UnbalancedBracket("missing close-bracket in substitution")
            out.append(eval_script(word[i + 1:j], env))
            i = j + 1
        elif c == "$":
            j = i + 1
            while j < n and word[j] in _VAR_CHARS:
                j += 1
            name = word[i + 1:j]
            if not name:
                out.append("$")
                i += 1
                continue
            if name not in env.variables:
                raise UnknownVariable(f"no variable {name!r}")
            out.append(env.variables[name])
            i = j
        else:
            out.append(c)
            i += 1
    return "".join(out)


# --- evaluation ----------------------------------------------------------------

def eval_script(text: str, env: Environment) -> str:
    """Run commands in order; the last command's result is the value."""
    result = ""
    for cmd in env.parse(text):
        env.drain_service()
        result = _eval_command(cmd, env)
    return result


@functools.lru_cache(maxsize=4096)
def _eval_expr_cached(text: str) -> str:
    return expr_mod.eval_expr(text)


def _expr_truthy(text: str) -> bool:
    return values.truthy(_eval_expr_cached(text))


def _eval_command(cmd: ParsedCommand, env: Environment) -> str:
    name = cmd.words[0].text
    try:
        argv = _substitute_words(cmd, env)
        name = argv[0]
        builtin = _BUILTINS.get(name)
        if builtin is not None:
            return builtin(cmd, argv, env)
        if "." in name or (env.registry is not None and name in env.registry.roots):
            return dispatch_object_command(env, name, argv[1:])
        raise UnknownCommand(f"unknown command {name!r}", cmd.line)
    except ScriptExit:
        raise
    except FrameworkError as exc:
        if isinstance(exc, ScriptError):
            if exc.line is None:
                exc.line = cmd.line
            raise
        if not hasattr(exc, "script_line"):
            exc.script_line = cmd.line          # type: ignore[attr-defined]
            exc.script_command = name           # type: ignore[attr-defined]
        raise


def _substitute_words(cmd: ParsedCommand, env: Environment) -> list[str]:
    return [w.text if w.braced else substitute(w.text, env) for w in cmd.words]


def error_location(exc: BaseException) -> str | None:
    """Format the command/line context attached during evaluation."""
    line = getattr(exc, "script_line", None)
    command = getattr(exc, "script_command", None)
    if line is None and isinstance(exc, ScriptError):
        line = exc.line
    if line is None and command is None:
        return None
    where = f"line {line}" if line is not None else "?"
    return f"{where}, command {command!r}" if command is not None else where


def dispatch_object_command(env: Environment, path: str, args: list[str]) -> str:
    """Run a registered-path command: field read/write or method invocation."""
    if env.registry is None:
        raise UnknownCommand(f"unknown command {path!r}")
    node = env.registry.resolve(path)
    if isinstance(node, MethodNode):
        if node.descriptor.parallel and env.runtime is not None and not env.in_broadcast:
            results = env.runtime.broadcast_invoke(path, args)
            return " ".join(r for r in results if r)
        result = node.invoke(args)
        return result if result is not None else ""
    if isinstance(node, FieldNode):
        if len(args) == 0:
            return node.get_text()
        if len(args) == 1:
            node.set_text(args[0])
            return args[0]
        raise ArityMismatch(f"{path}: fields take 0 (read) or 1 (write) argument")
    assert isinstance(node, CompoundNode)
    raise NotAScalar(f"{path} is a compound object, not a value or method")


# --- builtins ----------------------------------------------------------------

def _require(cond: bool, message: str, line: int) -> None:
    if not cond:
        raise ScriptError(message, line)


def _bi_set(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) in (2, 3), "set: usage 'set name ?value?'", cmd.line)
    name = argv[1]
    if len(argv) == 2:
        if name not in env.variables:
            raise UnknownVariable(f"no variable {name!r}", cmd.line)
        return env.variables[name]
    env.variables[name] = argv[2]
    return argv[2]


def _bi_puts(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) == 2, "puts: usage 'puts text'", cmd.line)
    env.output.write(argv[1] + "\n")
    return ""


def _bi_incr(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) in (2, 3), "incr: usage 'incr name ?delta?'", cmd.line)
    name = argv[1]
    if name not in env.variables:
        raise UnknownVariable(f"no variable {name!r}", cmd.line)
    current = values.parse_int(env.variables[name])
    delta = values.parse_int(argv[2]) if len(argv) == 3 else 1
    env.variables[name] = values.render_int(current + delta)
    return env.variables[name]


def _bi_expr(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) >= 2, "expr: usage 'expr text...'", cmd.line)
    return _eval_expr_cached(" ".join(argv[1:]))


def _cond_text(cmd: ParsedCommand, argv: list[str], env: Environment, idx: int) -> str:
    word = cmd.words[idx]
    return substitute(word.text, env) if word.braced else argv[idx]


def _body_text(cmd: ParsedCommand, argv: list[str], idx: int) -> str:
    word = cmd.words[idx]
    return word.text if word.braced else argv[idx]


def _bi_if(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    nargs = len(argv)
    _require(nargs in (3, 4, 5), "if: usage 'if cond then ?else else?'", cmd.line)
    if nargs == 5:
        _require(argv[3] == "else", "if: expected 'else'", cmd.line)
    if _expr_truthy(_cond_text(cmd, argv, env, 1)):
        return eval_script(_body_text(cmd, argv, 2), env)
    if nargs == 4:
        return eval_script(_body_text(cmd, argv, 3), env)
    if nargs == 5:
        return eval_script(_body_text(cmd, argv, 4), env)
    return ""


def _bi_while(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) == 3, "while: usage 'while cond body'", cmd.line)
    body = _body_text(cmd, argv, 2)
    # A braced condition is re-substituted and re-evaluated each iteration.
    while _expr_truthy(_cond_text(cmd, argv, env, 1)):
        env.drain_service()
        eval_script(body, env)
    return ""


def _bi_source(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) == 2, "source: usage 'source file'", cmd.line)
    path = env.resolve_path(argv[1])
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScriptError(f"source: cannot read {argv[1]!r}: {exc}", cmd.line)
    return eval_script(text, env)


def _bi_exit(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) in (1, 2), "exit: usage 'exit ?code?'", cmd.line)
    raise ScriptExit(values.parse_int(argv[1]) if len(argv) == 2 else 0)


def _bi_file(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) == 3 and argv[1] == "exists",
             "file: usage 'file exists path'", cmd.line)
    return "1" if env.resolve_path(argv[2]).exists() else "0"


def _bi_exec(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) >= 2, "exec: usage 'exec cmd ?args...?'", cmd.line)
    try:
        proc = subprocess.run(argv[1:], capture_output=True, text=True,
                              cwd=env.workdir)
    except OSError as exc:
        raise ExecFailed(f"exec {argv[1]!r}: {exc}", cmd.line)
    if proc.returncode != 0:
        raise ExecFailed(
            f"exec {argv[1]!r}: exit {proc.returncode}: {proc.stderr.strip()}",
            cmd.line)
    out = proc.stdout
    return out[:-1] if out.endswith("\n") else out


def _bi_cputime(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) == 1, "cputime takes no arguments", cmd.line)
    return values.render_float(env.cputime())


def _bi_plot(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) == 3, "plot: usage 'plot series value'", cmd.line)
    y = values.interpret_number(argv[2])
    if y is None:
        raise ParseError("Float", argv[2])
    x = env.series_x() if env.series_x is not None else float(env.series.length(argv[1]))
    env.series.append(argv[1], float(x), float(y))
    return ""


def _bi_parallel(cmd: ParsedCommand, argv: list[str], env: Environment) -> str:
    _require(len(argv) == 2, "parallel: usage 'parallel script'", cmd.line)
    script = _body_text(cmd, argv, 1)
    if env.runtime is None or env.in_broadcast:
        return eval_script(script, env)
    results = env.runtime.broadcast_eval(script)
    return " ".join(r for r in results if r)


_BUILTINS: dict[str, Callable[[ParsedCommand, list[str], Environment], str]] = {
    "set": _bi_set,
    "puts": _bi_puts,
    "incr": _bi_incr,
    "expr": _bi_expr,
    "if": _bi_if,
    "while": _bi_while,
    "source": _bi_source,
    "exit": _bi_exit,
    "file": _bi_file,
    "exec": _bi_exec,
    "cputime": _bi_cputime,
    "plot": _bi_plot,
    "parallel": _bi_parallel,
}
