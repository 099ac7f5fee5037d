"""py-evaluator-adapter command line."""

from __future__ import annotations

import argparse
import sys

from .server import AdapterConfig, serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="py-evaluator-adapter",
        description=(
            "Serve an image-scoring evaluator over the JSON-lines wire protocol "
            "(stdin/stdout), wrapping generator/quality/realism hooks or the "
            "classical fallback."
        ),
    )
    parser.add_argument("--image", required=True, help="input image (8-bit PNG)")
    parser.add_argument("--dim", type=int, required=True, help="noise vector dimension")
    parser.add_argument("--patch-size", type=int, default=128)
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--hooks", default=None, help="module path exposing generate/quality/realism")
    group.add_argument(
        "--fallback",
        action="store_true",
        help="identity generator + Laplacian-sharpness quality + constant realism",
    )
    args = parser.parse_args(argv)
    try:
        config = AdapterConfig(
            image_path=args.image,
            dimension=args.dim,
            patch_size=args.patch_size,
            hooks_module=args.hooks,
            fallback=args.fallback,
        )
        return serve(config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
