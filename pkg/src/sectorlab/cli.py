"""Command-line front end: ``sectorlab --input model.json``.

Exit codes: 0 success, 1 validation error, 2 engine assertion failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import contextvars
import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from . import numerics as nx
from .analyses import run_analysis
from .errors import EngineAssertion, InvalidInput, SectorLabError
from .modelspec import ModelSpec, SpecError, load_spec
from .report import render_json, render_text

__all__ = ["main", "run_spec", "emit_report", "build_parser"]

EXIT_OK, EXIT_VALIDATION, EXIT_ENGINE, EXIT_IO = 0, 1, 2, 3


def _run_one(spec: ModelSpec, name: str, opts: dict) -> dict:
    try:
        return {"name": name, "status": "ok", "result": run_analysis(spec, name, opts)}
    except SectorLabError as exc:
        return {"name": name, "status": "error", "error": {"type": type(exc).__name__, "message": str(exc)}}


def run_spec(text: str, tol: float | None = None, seed: int | None = None, jobs: int = 1) -> dict:
    """Parse a model document and run its analyses in declaration order."""
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    with nx.settings(tol=tol, seed=seed):
        spec = load_spec(text)
        tasks = list(spec.analyses)
        if jobs > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(contextvars.copy_context().run, _run_one, spec, n, o) for n, o in tasks]
                results = [f.result() for f in futures]
        else:
            results = [_run_one(spec, n, o) for n, o in tasks]
        used_tol, used_seed = nx.tol_eq(), nx.seed()
    warnings = [f"{r['name']}: {r['error']['type']}: {r['error']['message']}" for r in results
                if r["status"] == "error"]
    for r in results:
        note = r.get("result", {}).get("note") if r["status"] == "ok" else None
        if note:
            warnings.append(f"{r['name']}: {note}")
    return {"version": __version__, "input_sha256": digest, "seed": used_seed, "tol": used_tol,
            "results": results, "warnings": warnings}


def emit_report(report: dict, fmt: str = "json", out: str | None = None) -> str:
    text = render_json(report) if fmt == "json" else render_text(report)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
    return text


def exit_code(report: dict) -> int:
    """2 if any analysis hit an engine assertion, 1 if any other analysis failed, else 0."""
    engine = {c.__name__ for c in _subclasses(EngineAssertion)}
    kinds = [r["error"]["type"] for r in report["results"] if r["status"] == "error"]
    if any(k in engine for k in kinds):
        return EXIT_ENGINE
    return EXIT_VALIDATION if kinds else EXIT_OK


def _subclasses(cls):
    out = {cls}
    for sub in cls.__subclasses__():
        out |= _subclasses(sub)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sectorlab", description="Superselection, symmetry-breaking, "
                                "thermality and measurement analyses for finite models.")
    p.add_argument("--input", required=True, help="model document (JSON); '-' reads stdin")
    p.add_argument("--output", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--tol", type=float, help=f"equality tolerance (default {nx.TOL_EQ:g})")
    p.add_argument("--seed", type=int, help=f"seed for generic-element draws (default {nx.DEFAULT_SEED})")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for independent analyses")
    p.add_argument("--version", action="version", version=f"sectorlab {__version__}")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        report = run_spec(text, args.tol, args.seed, max(1, args.jobs))
    except SpecError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except EngineAssertion as exc:
        print(f"engine assertion: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except InvalidInput as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        emit_report(report, args.format, args.output)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    return exit_code(report)


if __name__ == "__main__":
    raise SystemExit(main())
