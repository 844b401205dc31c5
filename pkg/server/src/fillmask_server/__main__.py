"""Run the service: ``python -m fillmask_server`` or the ``fillmask-server`` script.

Environment: FILLMASK_MODEL selects the checkpoint (default bert-base-cased;
any local checkpoint directory works, e.g. one written by
``python -m fillmask_server.make_tiny``); FILLMASK_PORT selects the port
(default 8601).
"""

import os

import uvicorn

from .app import create_app

DEFAULT_PORT = 8601


def main() -> None:
    port = int(os.environ.get("FILLMASK_PORT", DEFAULT_PORT))
    uvicorn.run(create_app(), host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()
