"""Local HTTP/JSON service for the design studio.

Stateless: every request carries the netlist.  Endpoints live under
/api/v1 (and are aliased under /api).  Schema violations return 400,
engine errors 422 with the diagnostic message, and requests that exceed
the compute timeout 408.
"""

from __future__ import annotations

import concurrent.futures
import os
import time
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .analysis import CircuitAnalysis
from .errors import CircuitQError
from .hamiltonian import eigenenergies
from .netlist import parse_netlist
from .quantize import Quantity
from .spectrum import SolverConfig

DEFAULT_TIMEOUT_S = 30.0


class SolverOverrides(BaseModel):
    q_min: float = 1.0
    root_relative_tolerance: float = 1e-11
    root_max_iterations: int = 100


class AnalyzeRequest(SolverOverrides):
    netlist: str
    bindings: dict[str, float] = Field(default_factory=dict)


class ModeOut(BaseModel):
    f_Hz: float
    k_Hz: float
    A_Hz: float


class AnalyzeResponse(BaseModel):
    modes: list[ModeOut]
    chi_Hz: list[list[float]]
    warnings: list[str]
    timing_ms: float


class NormalModeRequest(AnalyzeRequest):
    mode: int = 0
    quantity: str = "voltage"


class PhasorOut(BaseModel):
    component_id: int
    kind: str
    label: Optional[str]
    node_minus: int
    node_plus: int
    re: float
    im: float


class NormalModeResponse(BaseModel):
    mode: int
    quantity: str
    phasors: list[PhasorOut]
    timing_ms: float


class HamiltonianRequest(AnalyzeRequest):
    modes: list[int] = Field(default_factory=lambda: [0])
    excitations: list[int] = Field(default_factory=lambda: [6])
    taylor: int = 4
    n_eigenenergies: int = 0


class HamiltonianResponse(BaseModel):
    eigenenergies_Hz: list[float]
    timing_ms: float


def _analysis(req: AnalyzeRequest) -> CircuitAnalysis:
    cfg = SolverConfig(
        root_relative_tolerance=req.root_relative_tolerance,
        root_max_iterations=req.root_max_iterations,
        q_min=req.q_min,
    )
    return CircuitAnalysis(parse_netlist(req.netlist), cfg)


def create_app(timeout_s: float | None = None) -> FastAPI:
    timeout = timeout_s if timeout_s is not None else float(
        os.environ.get("CIRCUITQ_TIMEOUT_S", DEFAULT_TIMEOUT_S)
    )
    app = FastAPI(title="circuitq", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    pool = concurrent.futures.ThreadPoolExecutor(max_workers=8)

    @app.exception_handler(RequestValidationError)
    async def schema_violation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(CircuitQError)
    async def engine_error(request: Request, exc: CircuitQError):
        return JSONResponse(
            status_code=422,
            content={"detail": str(exc), "code": type(exc).__name__},
        )

    def run_guarded(fn):
        future = pool.submit(fn)
        try:
            return future.result(timeout=timeout)
        except concurrent.futures.TimeoutError:
            raise _Timeout() from None

    class _Timeout(Exception):
        pass

    @app.exception_handler(_Timeout)
    async def timed_out(request: Request, exc: _Timeout):
        return JSONResponse(
            status_code=408,
            content={"detail": f"analysis exceeded {timeout} s"},
        )

    def analyze_impl(req: AnalyzeRequest) -> AnalyzeResponse:
        start = time.perf_counter()
        report = _analysis(req).report_dict(req.bindings)
        elapsed = (time.perf_counter() - start) * 1e3
        return AnalyzeResponse(
            modes=[ModeOut(**m) for m in report["modes"]],
            chi_Hz=report["chi_Hz"],
            warnings=report["warnings"],
            timing_ms=elapsed,
        )

    def normal_mode_impl(req: NormalModeRequest) -> NormalModeResponse:
        start = time.perf_counter()
        analysis = _analysis(req)
        quantity = Quantity(req.quantity)
        phasors = analysis.normal_mode_phasors(
            req.bindings, mode=req.mode, quantity=quantity
        )
        rows = []
        for p in phasors:
            e = analysis.rc.elements[p.element_id]
            rows.append(
                PhasorOut(
                    component_id=p.element_id,
                    kind=e.kind.value,
                    label=e.label,
                    node_minus=e.node_minus,
                    node_plus=e.node_plus,
                    re=p.value.real,
                    im=p.value.imag,
                )
            )
        elapsed = (time.perf_counter() - start) * 1e3
        return NormalModeResponse(
            mode=req.mode, quantity=quantity.value, phasors=rows, timing_ms=elapsed
        )

    def hamiltonian_impl(req: HamiltonianRequest) -> HamiltonianResponse:
        start = time.perf_counter()
        analysis = _analysis(req)
        op = analysis.hamiltonian(
            req.bindings,
            modes=req.modes,
            excitations=req.excitations,
            taylor=req.taylor,
        )
        energies = eigenenergies(op)
        if req.n_eigenenergies:
            energies = energies[: req.n_eigenenergies]
        elapsed = (time.perf_counter() - start) * 1e3
        return HamiltonianResponse(
            eigenenergies_Hz=[float(x) for x in energies], timing_ms=elapsed
        )

    def register(router_prefix: str) -> None:
        @app.post(f"{router_prefix}/analyze", response_model=AnalyzeResponse)
        async def analyze(req: AnalyzeRequest):  # noqa: F811 - per-prefix route
            return run_guarded(lambda: analyze_impl(req))

        @app.post(f"{router_prefix}/normal_mode", response_model=NormalModeResponse)
        async def normal_mode(req: NormalModeRequest):  # noqa: F811
            return run_guarded(lambda: normal_mode_impl(req))

        @app.post(f"{router_prefix}/hamiltonian", response_model=HamiltonianResponse)
        async def hamiltonian(req: HamiltonianRequest):  # noqa: F811
            return run_guarded(lambda: hamiltonian_impl(req))

        @app.get(f"{router_prefix}/health")
        async def health():  # noqa: F811
            return {"status": "ok", "version": __version__}

    register("/api/v1")
    register("/api")
    return app


def main() -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="circuitq-server")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT_S)
    args = parser.parse_args()
    uvicorn.run(create_app(args.timeout), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
