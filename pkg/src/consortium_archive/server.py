"""Server entry point: ``archive-server --config deployment.yaml``."""

from __future__ import annotations

import argparse

import uvicorn

from .api import create_app
from .archive import Archive
from .config import load_config


def build_app(config_path: str):
    return create_app(Archive(load_config(config_path)))


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="archive-server", description="Run the archive service."
    )
    parser.add_argument("--config", required=True, help="deployment configuration file")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)

    uvicorn.run(build_app(args.config), host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
