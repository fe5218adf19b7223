import argparse
import sys

from .server import serve


def main() -> int:
    parser = argparse.ArgumentParser(
        prog="lmac-bridge",
        description="Serve a pretrained causal LM over the lmac-bridge/1 stdio protocol.",
    )
    parser.add_argument("--weights", required=True, help="model checkpoint path")
    args = parser.parse_args()
    return serve(args.weights)


if __name__ == "__main__":
    sys.exit(main())
