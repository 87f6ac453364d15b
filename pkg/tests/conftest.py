from pathlib import Path
from typing import Any, AsyncGenerator, Callable

import pytest
from fastapi import FastAPI
from httpx import AsyncClient

from lrp.web.application import get_app

PROGRAMS = Path(__file__).parent / "programs"


@pytest.fixture(scope="session")
def anyio_backend() -> str:
    """
    Backend for anyio pytest plugin.

    :return: backend name.
    """
    return "asyncio"


@pytest.fixture(scope="session")
def program_path() -> Callable[[str], Path]:
    """
    Locate a listing under tests/programs.

    :return: function from a listing name to its path.
    """
    return lambda name: PROGRAMS / f"{name}.lrp"


@pytest.fixture(scope="session")
def program_source(program_path: Callable[[str], Path]) -> Callable[[str], str]:
    """
    Read a listing under tests/programs.

    :param program_path: listing locator.
    :return: function from a listing name to its text.
    """
    return lambda name: program_path(name).read_text(encoding="utf-8")


@pytest.fixture
def fastapi_app() -> FastAPI:
    """
    Fixture for creating FastAPI app.

    :return: fastapi app.
    """
    return get_app()


@pytest.fixture
async def client(
    fastapi_app: FastAPI,
    anyio_backend: Any,
) -> AsyncGenerator[AsyncClient, None]:
    """
    Fixture that creates client for requesting server.

    :param fastapi_app: the application.
    :yield: client for the app.
    """
    async with AsyncClient(app=fastapi_app, base_url="http://test", timeout=2.0) as ac:
        yield ac
