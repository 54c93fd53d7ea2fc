"""FastAPI application exposing the library over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import LatticeWalkError
from . import handlers, models


def create_app() -> FastAPI:
    app = FastAPI(title="latticewalk", description="dephased quantum-walk calculators")

    @app.exception_handler(LatticeWalkError)
    async def _domain_error(request: Request, exc: LatticeWalkError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=models.HealthResponse)
    def health():
        return handlers.handle_health()

    @app.post("/simulate", response_model=models.SimulateResponse, response_model_exclude_none=True)
    def simulate(req: models.SimulateRequest):
        return handlers.handle_simulate(req)

    @app.post("/fit", response_model=models.FitResponse)
    def fit(req: models.FitRequest):
        return handlers.handle_fit(req)

    @app.post("/rates", response_model=models.RatesResponse)
    def rates(req: models.RatesRequest):
        return handlers.handle_rates(req)

    @app.post("/memory", response_model=models.MemoryResponse, response_model_exclude_none=True)
    def memory(req: models.MemoryRequest):
        return handlers.handle_memory(req)

    @app.post("/wigner", response_model=models.WignerOut)
    def wigner(req: models.WignerRequest):
        return handlers.handle_wigner(req)

    return app


app = create_app()
