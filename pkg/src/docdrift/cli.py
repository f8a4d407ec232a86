"""Command-line front end.

The CLI is a thin client of the HTTP service: it builds the same request
bodies the service accepts and reads the same response bodies back. By
default it talks to an in-process instance of the app; ``--server`` points
it at a remote one instead. Paths are resolved against the invocation
directory before they are sent.

Exit codes: 0 clean, 1 at least one finding, 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import __version__

EXIT_ERROR = 2


class ServiceClient:
    """Minimal JSON-over-HTTP client: remote when given a URL, otherwise it
    speaks ASGI to an in-process instance of the service."""

    def __init__(self, server: str | None = None):
        self._server = server
        self._app = None
        if not server:
            from .service import create_app

            self._app = create_app()

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        return self._request("POST", path, json=payload)

    def get(self, path: str, params: dict) -> tuple[int, dict]:
        return self._request("GET", path, params=params)

    def _request(self, method: str, path: str, **kwargs: Any) -> tuple[int, dict]:
        import httpx

        if self._server:
            with httpx.Client(base_url=self._server, timeout=None) as client:
                response = client.request(method, path, **kwargs)
                return response.status_code, _body(response)

        import asyncio

        async def go() -> tuple[int, dict]:
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://docdrift.local", timeout=None
            ) as client:
                response = await client.request(method, path, **kwargs)
                return response.status_code, _body(response)

        return asyncio.run(go())


def _body(response: Any) -> dict:
    try:
        data = response.json()
        return data if isinstance(data, dict) else {"detail": data}
    except (ValueError, json.JSONDecodeError):
        return {"detail": response.text}


def _abspath(value: str | None) -> str | None:
    if value is None:
        return None
    return str(Path(value).resolve())


def _fail(body: dict) -> int:
    message = body.get("message") or body.get("detail") or "request failed"
    kind = body.get("error", "error")
    print(f"error ({kind}): {message}", file=sys.stderr)
    return EXIT_ERROR


def _cmd_scan(args: argparse.Namespace) -> int:
    client = ServiceClient(args.server)
    status, body = client.post(
        "/scan",
        {
            "root": _abspath(args.root),
            "config_path": _abspath(args.config),
            "function": args.function,
            "mode": args.mode,
            "report_dir": _abspath(args.report_dir),
        },
    )
    if status != 200:
        return _fail(body)
    print(body["summary"], end="")
    print(f"run directory: {body['run_dir']}")
    return int(body["exit_code"])


def _cmd_eval(args: argparse.Namespace) -> int:
    client = ServiceClient(args.server)
    status, body = client.post(
        "/eval",
        {
            "manifest": _abspath(args.manifest),
            "config_path": _abspath(args.config),
            "replay_dir": _abspath(args.replay),
            "subjects_root": _abspath(args.subjects_root),
            "sweep": args.sweep,
            "ratios": args.ratios,
            "draws": args.draws,
            "seed": args.seed,
            "report_dir": _abspath(args.report_dir),
        },
    )
    if status != 200:
        return _fail(body)
    print(body["summary"], end="")
    print(f"run directory: {body['run_dir']}")
    return int(body["exit_code"])


def _cmd_report(args: argparse.Namespace) -> int:
    client = ServiceClient(args.server)
    status, body = client.get("/report", {"run_dir": _abspath(args.run_dir)})
    if status != 200:
        return _fail(body)
    print(body["summary"], end="")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docdrift",
        description="Find code/documentation disagreements by executing documentation-derived tests.",
    )
    parser.add_argument("--version", action="version", version=f"docdrift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="analyze every eligible documented function under a tree")
    scan.add_argument("root", help="subject source tree")
    scan.add_argument("--config", required=True, help="YAML configuration file")
    scan.add_argument("--function", default=None, help="only analyze this qualified function name")
    scan.add_argument(
        "--mode",
        default=None,
        choices=["full", "no-p2f-gate", "phase1-only", "no_p2f_gate", "phase1_only"],
        help="verdict mode (default: from configuration)",
    )
    scan.add_argument("--report-dir", default=None, help="write the run here instead of a fresh run dir")
    scan.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    scan.set_defaults(func=_cmd_scan)

    evaluate = sub.add_parser("eval", help="score the detector against a labeled manifest")
    evaluate.add_argument("manifest", help="line-delimited JSON dataset manifest")
    evaluate.add_argument("--config", default=None, help="YAML configuration file (live mode)")
    evaluate.add_argument("--replay", default=None, help="reuse predictions from this prior run dir")
    evaluate.add_argument("--subjects-root", default=None, help="root holding project/revision trees")
    evaluate.add_argument("--sweep", action="store_true", help="run the class-imbalance sweep")
    evaluate.add_argument("--ratios", nargs="+", default=None, help="ratios like 50/50 10/90")
    evaluate.add_argument("--draws", type=int, default=None, help="subsets per ratio (default 1000)")
    evaluate.add_argument("--seed", type=int, default=None, help="sweep seed (default: config seed)")
    evaluate.add_argument("--report-dir", default=None)
    evaluate.add_argument("--server", default=None)
    evaluate.set_defaults(func=_cmd_eval)

    report = sub.add_parser("report", help="print the summary of a previous run")
    report.add_argument("run_dir")
    report.add_argument("--server", default=None)
    report.set_defaults(func=_cmd_report)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8787)
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # operational failures map to exit code 2
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
