from fastapi.routing import APIRouter

from lrp.web.api import monitoring, programs

api_router = APIRouter()
api_router.include_router(monitoring.router)
api_router.include_router(programs.router, prefix="/programs", tags=["programs"])
