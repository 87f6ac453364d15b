"""Check, transform and run programs over HTTP."""

from lrp.web.api.programs.views import router

__all__ = ["router"]
