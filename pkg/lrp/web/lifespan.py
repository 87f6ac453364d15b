from contextlib import asynccontextmanager
from typing import AsyncGenerator

from fastapi import FastAPI
from loguru import logger

from lrp.settings import settings


@asynccontextmanager
async def lifespan_setup(
    app: FastAPI,
) -> AsyncGenerator[None, None]:  # pragma: no cover
    """
    Actions to run on application startup.

    Announces the step budget every run is held to.

    :param app: the fastAPI application.
    :return: function that actually performs actions.
    """
    logger.info(
        "serving lrp in {} with a budget of {} steps",
        settings.environment,
        app.state.max_steps,
    )

    yield

    logger.info("lrp stopped")
