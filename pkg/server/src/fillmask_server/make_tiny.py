"""Write the pinned tiny checkpoint: ``python -m fillmask_server.make_tiny [DIR]``."""

import sys

from .tiny import build_tiny_checkpoint


def main() -> None:
    target = sys.argv[1] if len(sys.argv) > 1 else "tiny-checkpoint"
    path = build_tiny_checkpoint(target)
    print(f"wrote tiny checkpoint to {path}")


if __name__ == "__main__":
    main()
