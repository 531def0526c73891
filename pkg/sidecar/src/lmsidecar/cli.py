"""Entry point: load a model directory or hub id and serve the protocol."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .scoring import load_scorer


def parse_bind(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"--bind takes host:port, got {value!r}")
    return host, int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lm-sidecar",
        description="Serve token surprisals from a causal language model.",
    )
    parser.add_argument("--model", required=True, help="model directory or hub id")
    parser.add_argument("--device", default="cpu", help="torch device (default: cpu)")
    parser.add_argument(
        "--bind", type=parse_bind, default=("127.0.0.1", 8077), help="host:port"
    )
    parser.add_argument(
        "--max-batch",
        type=int,
        default=8,
        help="maximum in-flight scoring requests (default: 8)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.max_batch < 1:
        build_parser().error(f"--max-batch must be >= 1, got {args.max_batch}")
    host, port = args.bind
    app = create_app(
        loader=lambda: load_scorer(args.model, device=args.device),
        max_batch=args.max_batch,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
