"""Command-line entry point.

Wires a model world (demo or eco), optional workers and control service,
then evaluates one script file on rank 0.  Exit codes: the script's exit
code (0 by default), 2 for a script error, 3 for a configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import demo
from .descriptor import Registry
from .errors import FrameworkError
from .runtime import spawn_workers
from .script import Environment, ScriptExit, error_location, eval_script
from .service import ControlService
from .values import render_float

# Effectively no budget: scripts comparing [cputime] > $cpu_budget never trip.
UNLIMITED_BUDGET = 1e18


class SimulatedCpuClock:
    """Deterministic stand-in for process CPU time: one second per reading.

    Lets budget-limited scripts behave identically on every run and
    machine; the --cpu-budget flag then bounds the readings one process
    invocation may take before its budget check trips.
    """

    def __init__(self) -> None:
        self.calls = 0

    def __call__(self) -> float:
        self.calls += 1
        return float(self.calls)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # config errors exit 3, not 2
        self.print_usage(sys.stderr)
        print(f"simscript: {message}", file=sys.stderr)
        raise SystemExit(3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="simscript",
        description="Run a simulation experiment script against a registered model.")
    parser.add_argument("script", help="script file to evaluate on rank 0")
    parser.add_argument("--model", choices=["demo", "eco"], default="demo",
                        help="which built-in model to register (default: demo)")
    parser.add_argument("--workers", type=int, default=1, metavar="N",
                        help="number of worker contexts (default: 1)")
    parser.add_argument("--listen", metavar="HOST:PORT",
                        help="serve the control API (and web UI) on this address")
    parser.add_argument("--checkpoint-dir", default=".", metavar="PATH",
                        help="base directory for relative script paths (default: .)")
    parser.add_argument("--cpu-budget", type=float, metavar="SECONDS",
                        help="simulated CPU budget exposed as $cpu_budget, with "
                             "cputime advancing deterministically")
    parser.add_argument("--ui-dir", metavar="PATH",
                        help="directory of web UI static files (default: ./frontend "
                             "if present)")
    return parser


def _make_rank_env(rank: int, workdir: Path, model: str) -> Environment:
    registry = Registry()
    registry.base_dir = workdir
    if model == "demo":
        demo.register_demo(registry)  # every rank owns its own model instance
    return Environment(registry=registry, workdir=workdir)


def _parse_listen(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"--listen expects HOST:PORT, got {value!r}")
    return host or "127.0.0.1", int(port)


def run(args: argparse.Namespace) -> int:
    script_path = Path(args.script)
    if not script_path.is_file():
        print(f"simscript: script file not found: {script_path}", file=sys.stderr)
        return 3
    if args.workers < 1:
        print("simscript: --workers must be at least 1", file=sys.stderr)
        return 3
    workdir = Path(args.checkpoint_dir)
    if not workdir.is_dir():
        print(f"simscript: --checkpoint-dir not a directory: {workdir}", file=sys.stderr)
        return 3
    try:
        listen = _parse_listen(args.listen) if args.listen else None
    except ValueError as exc:
        print(f"simscript: {exc}", file=sys.stderr)
        return 3

    runtime = spawn_workers(
        args.workers, lambda rank: _make_rank_env(rank, workdir, args.model))
    env = runtime.workers[0].env
    registry = env.registry
    assert registry is not None

    if args.model == "eco":
        sim = demo.register_eco(registry, runtime)
        env.series_x = lambda: float(sim.tstep)
        tstep_source = lambda: sim.tstep
    else:
        model = registry.roots["model"].instance
        env.series_x = lambda: float(model.tstep)
        tstep_source = lambda: model.tstep

    if args.cpu_budget is not None:
        env.cputime = SimulatedCpuClock()
        env.variables["cpu_budget"] = render_float(args.cpu_budget)
    else:
        env.variables["cpu_budget"] = render_float(UNLIMITED_BUDGET)

    service = None
    if listen is not None:
        ui_dir = _find_ui_dir(args.ui_dir)
        service = ControlService(registry, env, tstep_source=tstep_source,
                                 static_dir=ui_dir)
        host, port = service.start(*listen)
        print(f"simscript: control API on http://{host}:{port}/", file=sys.stderr)

    code = 0
    try:
        text = script_path.read_text(encoding="utf-8")
        eval_script(text, env)
    except ScriptExit as exc:
        code = exc.code
    except FrameworkError as exc:
        where = error_location(exc)
        location = f" ({where})" if where else ""
        print(f"simscript: script error{location}: {exc}", file=sys.stderr)
        code = 2
    finally:
        if service is not None:
            if code == 0:
                _serve_until_interrupt(env)
            service.stop()
    return code


def _find_ui_dir(explicit: str | None) -> Path | None:
    if explicit:
        return Path(explicit)
    candidate = Path.cwd() / "frontend"
    return candidate if (candidate / "index.html").is_file() else None


def _serve_until_interrupt(env: Environment) -> None:
    import time
    print("simscript: script finished; serving until Ctrl-C", file=sys.stderr)
    try:
        while True:
            env.drain_service()
            time.sleep(0.02)
    except KeyboardInterrupt:
        pass


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
