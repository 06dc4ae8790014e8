"""Command-line front door.

Subcommands: ``prompt`` (render without any backend), ``explain``, ``index``
(JSON-lines dump), and ``serve`` (JSON-RPC on stdio). Line/column arguments
are 1-based for humans and converted internally. stdout carries exactly the
artifact; diagnostics go to stderr. Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from gptutor.config import load_service_config
from gptutor.errors import GPTutorError
from gptutor.extractor import ExplainRequest, Selection, extract_context
from gptutor.gateway import BACKEND_NAMES
from gptutor.indexer import Position, scan_workspace
from gptutor.prompt import build_prompt, fit_to_budget
from gptutor.service import ExplainService


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workspace", required=True, help="workspace root directory")
    parser.add_argument("--config", default=None, help="path to a gptutor.json config file")


def _add_selection(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--file", required=True, help="file path, relative to the workspace")
    parser.add_argument("--line", required=True, type=int, help="cursor line (1-based)")
    parser.add_argument("--col", required=True, type=int, help="cursor column (1-based)")
    parser.add_argument("--end-line", type=int, default=None, help="selection end line (1-based)")
    parser.add_argument(
        "--end-col", type=int, default=None, help="selection end column (1-based, exclusive)"
    )
    parser.add_argument("--budget", type=int, default=None, help="token budget for the prompt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gptutor", description="Explain selected code with cross-file context."
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_prompt = sub.add_parser("prompt", help="print the rendered prompt, no backend involved")
    _add_common(p_prompt)
    _add_selection(p_prompt)

    p_explain = sub.add_parser("explain", help="explain the selection via a backend")
    _add_common(p_explain)
    _add_selection(p_explain)
    p_explain.add_argument("--backend", choices=BACKEND_NAMES, default=None)
    p_explain.add_argument("--model", default=None)
    p_explain.add_argument("--transcripts", default=None, help="transcript store for replay")

    p_index = sub.add_parser("index", help="dump the symbol index as JSON lines")
    _add_common(p_index)

    p_serve = sub.add_parser("serve", help="run the JSON-RPC server on stdio")
    _add_common(p_serve)
    p_serve.add_argument("--backend", choices=BACKEND_NAMES, default=None)
    p_serve.add_argument("--transcripts", default=None, help="transcript store for replay")

    return parser


def _flag_settings(args: argparse.Namespace) -> dict:
    settings: dict = {}
    if getattr(args, "budget", None) is not None:
        settings["tokenBudget"] = args.budget
    if getattr(args, "model", None) is not None:
        settings["model"] = args.model
    if getattr(args, "backend", None) is not None:
        settings["backend"] = args.backend
    if getattr(args, "transcripts", None) is not None:
        settings["transcripts"] = args.transcripts
    return settings


def _selection_from(args: argparse.Namespace) -> Selection:
    start = Position(args.line - 1, args.col - 1)
    if args.end_line is not None or args.end_col is not None:
        end_line = args.end_line if args.end_line is not None else args.line
        end_col = args.end_col if args.end_col is not None else args.col
        end = Position(end_line - 1, end_col - 1)
    else:
        end = start
    return Selection(path=args.file, start=start, end=end)


def _cmd_prompt(args: argparse.Namespace) -> int:
    config = load_service_config(
        args.workspace, config_path=args.config, flag_settings=_flag_settings(args)
    )
    index = scan_workspace(config.workspace_root, config.index_config)
    req = ExplainRequest(
        workspace_root=str(config.workspace_root), selection=_selection_from(args)
    )
    bundle = extract_context(
        req, index, defining_file_budget=config.defining_file_budget
    )
    fitted = fit_to_budget(bundle, config.budget)
    prompt = build_prompt(fitted, config.budget, config.llm.model)
    sys.stdout.write(f"{prompt.system_message}\n---\n{prompt.user_message}\n")
    return 0


def _cmd_explain(args: argparse.Namespace) -> int:
    config = load_service_config(
        args.workspace, config_path=args.config, flag_settings=_flag_settings(args)
    )
    service = ExplainService(config)
    req = ExplainRequest(
        workspace_root=str(config.workspace_root),
        selection=_selection_from(args),
        model_override=args.model,
        backend=config.default_backend,
    )
    result = service.handle_explain(req)
    print(result.text)
    print(
        f"model={result.model} backend={result.backend} cached={result.cached} "
        f"latency={result.latency_ms}ms",
        file=sys.stderr,
    )
    return 0


def _cmd_index(args: argparse.Namespace) -> int:
    config = load_service_config(args.workspace, config_path=args.config)
    index = scan_workspace(config.workspace_root, config.index_config)
    sys.stdout.write(index.to_jsonl())
    for skipped in index.skipped_paths:
        print(f"skipped: {skipped}", file=sys.stderr)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = load_service_config(
        args.workspace, config_path=args.config, flag_settings=_flag_settings(args)
    )
    from gptutor.rpc import serve

    return serve(sys.stdin.buffer, sys.stdout.buffer, config)


_COMMANDS = {
    "prompt": _cmd_prompt,
    "explain": _cmd_explain,
    "index": _cmd_index,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except GPTutorError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
