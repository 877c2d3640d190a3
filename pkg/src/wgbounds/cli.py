"""Command-line client of the wgbounds service.

The CLI is a thin HTTP client: it loads a YAML config, posts it to the
service, and writes the returned artifact files.  By default the request is
routed through the ASGI app in-process (no server needed); --server sends it
to a running instance instead.  `wgbounds serve` starts one.

Exit codes: 0 success, 1 validation failure, 2 numerical nonconvergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .errors import ConfigError

VERBS = ("validate", "solve", "bounds", "verify", "calibrate")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wgbounds", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb, help=f"run the {verb} pipeline")
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--out", default=None, help="directory for artifact files")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--threads", type=int, default=None, help="override config threads")
        p.add_argument("--server", default=None, help="base URL of a running service")
    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    # in-process transport through the same HTTP stack
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _load_payload(args) -> dict:
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from exc
    payload: dict = {"config": raw or {}}
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.threads is not None:
        payload["threads"] = args.threads
    return payload


def _summarize(verb: str, body: dict) -> str:
    lines = [f"wgbounds {verb}: config_hash={body.get('config_hash', '?')}"]
    for key, value in sorted(body.get("summary", {}).items()):
        lines.append(f"  {key} = {value}")
    return "\n".join(lines)


def run_verb(args) -> int:
    try:
        payload = _load_payload(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with _client(args.server) as client:
        resp = client.post(f"/{args.verb}", json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json()
        except (ValueError, json.JSONDecodeError):
            detail = {"kind": "internal", "message": resp.text}
        kind = detail.get("kind", "validation")
        print(f"error [{kind}]: {detail.get('message', detail)}", file=sys.stderr)
        if args.out and detail.get("files"):
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for name, text in sorted(detail["files"].items()):
                (out / name).write_text(text)
            print(f"flushed {len(detail['files'])} partial file(s) to {out}", file=sys.stderr)
        return 2 if kind == "nonconvergence" else 1
    body = resp.json()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(body.get("files", {}).items()):
            (out / name).write_text(text)
        print(f"wrote {len(body.get('files', {}))} file(s) to {out}")
    print(_summarize(args.verb, body))
    summary = body.get("summary", {})
    if args.verb == "validate" and not summary.get("valid", True):
        return 1
    if args.verb == "verify" and not summary.get("ok", True):
        return 1
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.verb == "serve":
        import uvicorn

        uvicorn.run("wgbounds.service:app", host=args.host, port=args.port)
        return 0
    return run_verb(args)


if __name__ == "__main__":
    sys.exit(main())
