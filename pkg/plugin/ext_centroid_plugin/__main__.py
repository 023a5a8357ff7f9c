"""Run the planner from the command line.

    python -m ext_centroid_plugin --listen 127.0.0.1:0

The first stdout line ends with the bound host:port, which is the only
handshake a supervisor needs; port 0 asks the OS for a free one.
"""

from __future__ import annotations

import argparse

from .server import PlannerServer


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="python -m ext_centroid_plugin",
        description="centroid grasp planner component over a framed socket")
    parser.add_argument("--listen", default="127.0.0.1:0", metavar="HOST:PORT",
                        help="bind address; port 0 picks a free port "
                             "(default %(default)s)")
    args = parser.parse_args(argv)

    host, sep, port_text = args.listen.rpartition(":")
    if not sep or not host:
        parser.error(f"--listen needs HOST:PORT, got {args.listen!r}")
    try:
        port = int(port_text)
    except ValueError:
        parser.error(f"--listen port must be an integer, got {port_text!r}")

    server = PlannerServer(host, port)
    print(f"ext_centroid grasp planner listening on {server.endpoint}",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()
