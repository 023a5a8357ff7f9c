import threading

import pytest

pytest.importorskip("ext_centroid_plugin")

from ext_centroid_plugin import PlannerServer

from rawclient import RawClient


@pytest.fixture
def server():
    srv = PlannerServer("127.0.0.1", 0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.stop()
    thread.join(timeout=5)
    assert not thread.is_alive()


@pytest.fixture
def client(server):
    c = RawClient(server.endpoint)
    yield c
    c.close()
