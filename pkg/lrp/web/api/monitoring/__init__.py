"""API for checking project status."""

from lrp.web.api.monitoring.views import router

__all__ = ["router"]
