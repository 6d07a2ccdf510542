"""Command-line entry point."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional

from .config import ConfigError, load_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roundtable",
        description="Collaborative urban co-design deliberation service.")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", help="bind address (default 127.0.0.1)")
    serve.add_argument("--port", type=int, help="bind port (default 8321)")
    serve.add_argument("--store", choices=["memory", "file"],
                       help="document store backend")
    serve.add_argument("--store-path", help="data directory for the file store")
    serve.add_argument("--chat-provider", choices=["mock", "live"],
                       help="chat completion backend")
    serve.add_argument("--scene-provider", choices=["mock", "live"],
                       help="street-view imagery backend")
    serve.add_argument("--image-provider", choices=["mock", "live"],
                       help="image revision backend")
    serve.add_argument("--static-dir", help="serve a built frontend from this directory")
    serve.add_argument("--cors-origins", help="comma-separated allowed origins")
    serve.add_argument("--log-level", default="info",
                       choices=["debug", "info", "warning", "error"])
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    mapping = {
        "host": args.host,
        "port": args.port,
        "store_mode": args.store,
        "store_path": args.store_path,
        "chat_provider": args.chat_provider,
        "scene_provider": args.scene_provider,
        "image_provider": args.image_provider,
        "static_dir": args.static_dir,
        "cors_origins": args.cors_origins,
    }
    return {k: v for k, v in mapping.items() if v is not None}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(asctime)s %(levelname)s %(name)s %(message)s")
    try:
        config = load_config(overrides=_overrides(args))
    except ConfigError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 2

    # Imported here so `--help` works without the HTTP stack installed.
    import uvicorn

    from .api import create_app
    from .config import build_services

    services = build_services(config)
    app = create_app(services)
    try:
        uvicorn.run(app, host=config.host, port=config.port,
                    log_level=args.log_level)
    finally:
        services.store.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
