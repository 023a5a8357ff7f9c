"""A deliberately dumb socket client: bytes in, frames out.

Speaking raw bytes instead of envelopes lets tests send exactly the
traffic a misbehaving peer would.
"""

import socket
import struct

from ext_centroid_plugin import decode_frame


class RawClient:
    def __init__(self, endpoint):
        host, _, port = endpoint.rpartition(":")
        self.sock = socket.create_connection((host, int(port)), timeout=5)

    def send_bytes(self, data):
        self.sock.sendall(data)

    def read_frame(self):
        header = self._read_exact(4)
        if header is None:
            return None
        (n,) = struct.unpack(">I", header)
        body = self._read_exact(n)
        assert body is not None, "stream closed mid-frame"
        return decode_frame(header + body)

    def _read_exact(self, n):
        parts = b""
        while len(parts) < n:
            chunk = self.sock.recv(n - len(parts))
            if not chunk:
                return None if not parts else parts
            parts += chunk
        return parts

    def closed_by_peer(self):
        """True when the next read hits EOF instead of a frame."""
        try:
            return self.sock.recv(1) == b""
        except OSError:
            return True

    def close(self):
        self.sock.close()
