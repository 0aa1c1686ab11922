import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from dbpsim import HistoryStore, Session, load_scenario  # noqa: E402

FIXTURES = ROOT / "fixtures"
GOLDENS = FIXTURES / "goldens"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def goldens_dir() -> Path:
    return GOLDENS


@pytest.fixture(scope="session")
def ordering_scenario():
    return load_scenario((FIXTURES / "ordering.scenario.json").read_bytes())


@pytest.fixture(scope="session")
def branching_scenario():
    return load_scenario((FIXTURES / "branching.scenario.json").read_bytes())


@pytest.fixture(scope="session")
def oscillator_scenario():
    return load_scenario((FIXTURES / "oscillator.scenario.json").read_bytes())


@pytest.fixture(scope="session")
def flatgoal_scenario():
    return load_scenario((FIXTURES / "flatgoal.scenario.json").read_bytes())


@pytest.fixture
def ordering_session(ordering_scenario):
    return Session(ordering_scenario, seed=42)


@pytest.fixture
def store():
    return HistoryStore()


@pytest.fixture
def live_server():
    """A real uvicorn server on an ephemeral port, for streaming tests."""
    import threading
    import time

    import uvicorn

    from dbpsim.api import create_app

    app = create_app(step_delay=0)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
