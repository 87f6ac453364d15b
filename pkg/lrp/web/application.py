from importlib import metadata

from fastapi import FastAPI, Request
from fastapi.responses import UJSONResponse

from lrp.lang.errors import LanguageError
from lrp.log import configure_logging
from lrp.settings import settings
from lrp.web.api.programs.schema import ErrorResponse
from lrp.web.lifespan import lifespan_setup


async def language_error_handler(request: Request, exc: Exception) -> UJSONResponse:
    """
    Report a diagnostic of the toolchain as an unprocessable program.

    :param request: failed request.
    :param exc: the LanguageError raised while handling it.
    :return: 422 response carrying the diagnostic.
    """
    assert isinstance(exc, LanguageError)  # noqa: S101
    body = ErrorResponse(
        code=exc.code,
        message=exc.message,
        line=exc.position.line if exc.position else None,
        col=exc.position.col if exc.position else None,
    )
    return UJSONResponse(status_code=422, content=body.model_dump())


def get_app() -> FastAPI:
    """
    Get FastAPI application.

    This is the main constructor of an application.

    :return: application.
    """
    configure_logging()
    app = FastAPI(
        title="lrp",
        version=metadata.version("lrp"),
        lifespan=lifespan_setup,
        docs_url="/",
        redoc_url="/api/redoc",
        openapi_url="/api/openapi.json",
        default_response_class=UJSONResponse,
    )
    app.state.max_steps = settings.max_steps
    app.add_exception_handler(LanguageError, language_error_handler)

    from lrp.web.api.router import api_router

    # Main router for the API.
    app.include_router(router=api_router, prefix="/api")

    return app
