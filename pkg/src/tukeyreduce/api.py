"""HTTP service wrapping the core operations.

Run with `uvicorn tukeyreduce.api:app`.  The CLI talks to this app
in-process by default, or to a remote instance via --server.

Error mapping: parameter/shape/domain problems answer 400 with a JSON body
{"kind", "detail"}; convergence-class failures answer 409 the same way.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .bench import BenchPlan, gen_gaussian, inject_outliers, run_bench
from .exceptions import (ConvergenceError, DomainError, FlatStartError,
                         ParameterError, ShapeError, StagnationError,
                         WeightInvariantError)
from .hardgen import formula_to_instance, parse_dimacs
from .heavy import derived_seed
from .linalg import to_dense
from .loss import LossSpec
from .models import (BenchRequest, BenchResponse, BenchRow, BenchSummaryRow,
                     GenerateRequest, GenerateResponse, Instance,
                     ReduceSatRequest, ReduceSatResponse, SampleRequest,
                     SampleResponse, SketchRequest, SketchResponse,
                     SketchSpecOut, SolveRequest, SolveResponse, float_or_none)
from .msketch import SketchSpec, sketch_instance, spec_for_row_budget
from .rowsample import SampleConfig, reduce_rows
from .solver import brute_force_solve, irls_solve

PARAMETER_ERRORS = (ParameterError, DomainError, ShapeError, WeightInvariantError)
CONVERGENCE_ERRORS = (ConvergenceError, StagnationError, FlatStartError)

_KIND = {
    ParameterError: "parameter_error",
    DomainError: "domain_error",
    ShapeError: "shape_error",
    WeightInvariantError: "weight_invariant_error",
    ConvergenceError: "convergence_error",
    StagnationError: "stagnation_error",
    FlatStartError: "flat_start_error",
}


def _error_kind(exc: Exception) -> str:
    for klass, kind in _KIND.items():
        if isinstance(exc, klass):
            return kind
    return "error"


def create_app() -> FastAPI:
    app = FastAPI(title="tukeyreduce", version=__version__)

    @app.exception_handler(ParameterError)
    @app.exception_handler(DomainError)
    @app.exception_handler(ShapeError)
    @app.exception_handler(WeightInvariantError)
    async def _parameter_handler(request: Request, exc: Exception):
        return JSONResponse(status_code=400,
                            content={"kind": _error_kind(exc), "detail": str(exc)})

    @app.exception_handler(ConvergenceError)
    @app.exception_handler(StagnationError)
    @app.exception_handler(FlatStartError)
    async def _convergence_handler(request: Request, exc: Exception):
        return JSONResponse(status_code=409,
                            content={"kind": _error_kind(exc), "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest):
        a, b = gen_gaussian(req.n, req.d, seed=req.seed)
        if req.outlier_fraction > 0:
            b = inject_outliers(b, req.outlier_fraction, req.outlier_magnitude,
                                seed=derived_seed(req.seed, "outliers"))
        return GenerateResponse(
            instance=Instance(a=a.tolist(), b=b.tolist()))

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        a, b = req.instance.arrays()
        loss = req.loss.to_spec()
        if req.method == "grid":
            report = brute_force_solve(a, b, loss, w=req.weights)
        else:
            report = irls_solve(a, b, loss, w=req.weights,
                                restarts=req.restarts, max_iter=req.max_iter,
                                tol=req.tol, seed=req.seed)
        return SolveResponse(x=report.x.tolist(), objective=report.objective,
                             iterations=report.iterations,
                             restarts=report.restarts,
                             converged=report.converged,
                             trace=[float(t) for t in report.trace])

    @app.post("/sample", response_model=SampleResponse)
    def sample(req: SampleRequest):
        a, b = req.instance.arrays()
        cfg = SampleConfig(req.loss.to_spec(), eps=req.eps, delta=req.delta,
                           target_rows=req.target_rows, seed=req.seed,
                           max_depth=req.max_depth)
        w, info = reduce_rows(a, b, cfg, return_info=True)
        return SampleResponse(n=w.n, indices=w.indices.tolist(),
                              values=w.values.tolist(),
                              achieved_rows=w.support_size, depth=info.depth)

    @app.post("/sketch", response_model=SketchResponse)
    def sketch(req: SketchRequest):
        a, b = req.instance.arrays()
        if req.rows_cap is not None:
            spec = spec_for_row_budget(a.shape[0], req.rows_cap)
        else:
            spec = SketchSpec(m=req.m, b=req.b, c=req.c, gamma=req.gamma,
                              eps=req.eps)
        sk, sa, sb, weights = sketch_instance(a, b, spec, seed=req.seed)
        return SketchResponse(
            sa=to_dense(sa).tolist(), sb=np.asarray(sb).tolist(),
            weights=weights.tolist(), rows=sk.rows, levels=sk.hmax + 1,
            spec=SketchSpecOut(m=sk.spec.m, b=sk.b, c=sk.spec.c,
                               gamma=sk.spec.gamma, eps=sk.spec.eps))

    @app.post("/reduce-sat", response_model=ReduceSatResponse)
    def reduce_sat(req: ReduceSatRequest):
        formula = parse_dimacs(req.dimacs)
        loss = LossSpec(kind=req.kind, tau=req.tau, p=req.p, scale=req.scale)
        a, b, manifest = formula_to_instance(formula, loss)
        return ReduceSatResponse(
            instance=Instance(a=to_dense(a).tolist(), b=b.tolist()),
            manifest=manifest)

    @app.post("/bench", response_model=BenchResponse)
    def bench(req: BenchRequest):
        plan = BenchPlan(n=req.n, d=req.d, loss=req.loss.to_spec(),
                         sizes=tuple(req.sizes), methods=tuple(req.methods),
                         reps=req.reps, seed=req.seed,
                         outlier_fraction=req.outlier_fraction,
                         outlier_magnitude=req.outlier_magnitude,
                         restarts=req.restarts, max_iter=req.max_iter,
                         tol=req.tol, sample_eps=req.sample_eps,
                         sample_delta=req.sample_delta)
        result = run_bench(plan, threads=req.threads)
        rows = [BenchRow(method=r["method"], size=r["size"], rep=r["rep"],
                         ratio=float_or_none(r["ratio"]),
                         wall_time_ms=r["wall_time_ms"],
                         achieved_rows=r.get("achieved_rows"),
                         stalled=r.get("stalled"), note=r.get("note"))
                for r in result.rows]
        summary = [BenchSummaryRow(method=s["method"], size=s["size"],
                                   best_ratio=float_or_none(s["best_ratio"]))
                   for s in result.summary]
        return BenchResponse(rows=rows, summary=summary,
                             metadata=result.metadata)

    return app


app = create_app()
