"""Local HTTP interface over the simulator.

The service holds no state that affects simulation output: a run is a pure
function of its request payload, executed to completion on a worker thread
and then queried.  Playback controls (step, step-back, slow motion) are
client-side cursor movements over the deterministic frame endpoint.
"""

from __future__ import annotations

import dataclasses
import threading
import uuid
from collections import OrderedDict
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles

from .. import dsl
from ..circuit import path_length_report, route
from ..constants import DELTA_T, PHOTON_ENERGY
from ..engine import GRID_LATENCY, INSTANT, RunConfig, RunResult, frame_at, run as engine_run
from ..pipelines import PIPELINES, RunOutcome
from ..recorder import tabulate
from . import schemas

_FRAME_CACHE_SIZE = 32


class _Run:
    def __init__(self, run_id: str, spec, graph, config: RunConfig):
        self.run_id = run_id
        self.spec = spec
        self.graph = graph
        self.config = config
        self.status = "queued"
        self.progress = 0.0
        self.error: Optional[str] = None
        self.records = None
        self.table = None
        self.frames: OrderedDict = OrderedDict()
        self.lock = threading.Lock()

    def execute(self) -> None:
        self.status = "running"
        try:
            def on_progress(fraction: float) -> None:
                self.progress = fraction

            self.records = engine_run(self.graph, self.config, progress=on_progress)
            if self.records.detector_labels:
                self.table = tabulate(self.records)
            self.progress = 1.0
            self.status = "done"
        except Exception as exc:  # surfaced through the status endpoint
            self.error = str(exc)
            self.status = "error"

    def frame(self, step: int):
        with self.lock:
            if step in self.frames:
                self.frames.move_to_end(step)
                return self.frames[step]
        frame = frame_at(self.graph, self.config, step)
        with self.lock:
            self.frames[step] = frame
            while len(self.frames) > _FRAME_CACHE_SIZE:
                self.frames.popitem(last=False)
        return frame


def _diag_out(diag) -> schemas.DiagnosticOut:
    return schemas.DiagnosticOut(
        severity=diag.severity,
        message=diag.message,
        line=getattr(diag, "line", None),
        col=getattr(diag, "col", None),
        x=getattr(diag, "x", None),
        y=getattr(diag, "y", None),
    )


def _placement_out(placement) -> schemas.PlacementOut:
    return schemas.PlacementOut(
        kind=type(placement.params).__name__,
        x=placement.x,
        y=placement.y,
        orientation=placement.orientation,
        label=placement.label,
        params=dataclasses.asdict(placement.params),
    )


def create_app(ui_dir: Optional[str] = None) -> FastAPI:
    """Service application; pass a built frontend directory to also serve it."""

    app = FastAPI(title="beamlab", version="0.1.0")
    runs: dict = {}
    runs_lock = threading.Lock()

    def get_run(run_id: str) -> _Run:
        with runs_lock:
            state = runs.get(run_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        return state

    @app.post("/api/validate", response_model=schemas.ValidateResponse)
    def validate(request: schemas.ValidateRequest):
        parsed = dsl.parse(request.dsl_text)
        diagnostics = [_diag_out(d) for d in parsed.diagnostics]
        placements = []
        path_entries = []
        canonical = None
        if parsed.spec is not None:
            placements = [_placement_out(p) for p in parsed.spec.placements]
            canonical = dsl.serialize(parsed.spec)
            graph = route(parsed.spec.placements)
            diagnostics += [_diag_out(d) for d in graph.diagnostics]
            if graph.ok:
                report, warnings = path_length_report(graph)
                diagnostics += [_diag_out(d) for d in warnings]
                for det_id, entries in sorted(report.items()):
                    for src_id, latency in entries:
                        path_entries.append(
                            schemas.PathEntryOut(
                                source=graph.nodes[src_id].label,
                                detector=graph.nodes[det_id].label,
                                latency_steps=latency,
                            )
                        )
        ok = parsed.spec is not None and not any(
            d.severity == "error" for d in diagnostics
        )
        return schemas.ValidateResponse(
            ok=ok,
            diagnostics=diagnostics,
            placements=placements,
            path_length_report=path_entries,
            canonical_text=canonical,
        )

    @app.post("/api/runs", response_model=schemas.RunCreated, status_code=201)
    def create_run(request: schemas.RunRequest):
        parsed = dsl.parse(request.dsl_text)
        if not parsed.ok:
            raise HTTPException(
                status_code=400,
                detail=[str(d) for d in parsed.diagnostics if d.severity == "error"],
            )
        graph = route(parsed.spec.placements)
        if not graph.ok:
            raise HTTPException(
                status_code=400,
                detail=[str(d) for d in graph.diagnostics if d.severity == "error"],
            )
        if request.mode not in (GRID_LATENCY, INSTANT):
            raise HTTPException(status_code=400, detail=f"unknown mode {request.mode!r}")
        config = RunConfig(
            seed=request.seed,
            num_steps=request.num_steps or parsed.spec.num_steps,
            propagation_mode=request.mode,
        )
        run_id = uuid.uuid4().hex[:12]
        state = _Run(run_id, parsed.spec, graph, config)
        with runs_lock:
            runs[run_id] = state
        thread = threading.Thread(target=state.execute, daemon=True)
        thread.start()
        return schemas.RunCreated(run_id=run_id)

    @app.get("/api/runs/{run_id}", response_model=schemas.RunStatus)
    def run_status(run_id: str):
        state = get_run(run_id)
        totals = None
        table = None
        meter_labels = [n.label for n in state.graph.power_meters()]
        detector_labels = [n.label for n in state.graph.detectors()]
        if state.status == "done":
            totals = state.records.totals()
            if state.table is not None:
                table = state.table.to_dict()
        return schemas.RunStatus(
            run_id=run_id,
            status=state.status,
            progress=state.progress,
            num_steps=state.config.num_steps,
            error=state.error,
            meter_labels=meter_labels,
            detector_labels=detector_labels,
            detector_totals=totals,
            coincidence_table=table,
        )

    @app.get("/api/runs/{run_id}/records", response_model=schemas.RecordsPage)
    def run_records(
        run_id: str,
        start: int = Query(default=0, alias="from", ge=0),
        to: Optional[int] = Query(default=None, ge=0),
    ):
        state = get_run(run_id)
        if state.status != "done":
            raise HTTPException(status_code=409, detail="run has not finished")
        records = state.records
        stop = min(to if to is not None else records.num_steps, records.num_steps)
        steps = []
        for t in range(start, stop):
            steps.append(
                schemas.StepOut(
                    step=t,
                    time_s=t * DELTA_T,
                    powers={
                        label: float(records.powers[t, i])
                        for i, label in enumerate(records.meter_labels)
                    },
                    clicks={
                        label: int(records.clicks[t, i])
                        for i, label in enumerate(records.detector_labels)
                    },
                )
            )
        return schemas.RecordsPage(run_id=run_id, start=start, stop=stop, steps=steps)

    @app.get("/api/runs/{run_id}/frames/{step}", response_model=schemas.FrameResponse)
    def run_frame(run_id: str, step: int):
        state = get_run(run_id)
        if not 0 <= step < state.config.num_steps:
            raise HTTPException(status_code=404, detail=f"step {step} out of range")
        completed = int(state.progress * state.config.num_steps)
        if state.status != "done" and step >= completed:
            raise HTTPException(
                status_code=409, detail=f"step {step} beyond run progress"
            )
        frame = state.frame(step)
        edges = []
        for edge in frame.edges:
            cells = []
            for cell in edge.cells:
                h = complex(*cell.jones[0])
                v = complex(*cell.jones[1])
                norm_sq = abs(h) ** 2 + abs(v) ** 2
                bloch = None
                if norm_sq > 0:
                    cross = h.conjugate() * v
                    bloch = [
                        2.0 * cross.real / norm_sq,
                        2.0 * cross.imag / norm_sq,
                        (abs(h) ** 2 - abs(v) ** 2) / norm_sq,
                    ]
                cells.append(
                    schemas.FrameCellOut(
                        x=cell.x,
                        y=cell.y,
                        h_re=h.real,
                        h_im=h.imag,
                        v_re=v.real,
                        v_im=v.imag,
                        power_W=norm_sq * PHOTON_ENERGY / DELTA_T,
                        bloch=bloch,
                    )
                )
            edges.append(
                schemas.FrameEdgeOut(
                    edge_id=edge.edge_id,
                    src=edge.src_label,
                    dst=edge.dst_label,
                    cells=cells,
                )
            )
        return schemas.FrameResponse(run_id=run_id, step=step, edges=edges)

    @app.post("/api/analyze", response_model=schemas.AnalyzeResponse)
    def analyze(request: schemas.AnalyzeRequest):
        pipeline = PIPELINES.get(request.pipeline)
        if pipeline is None:
            raise HTTPException(
                status_code=400,
                detail=f"unknown pipeline {request.pipeline!r}; "
                f"available: {', '.join(sorted(PIPELINES))}",
            )
        tags = request.params.get("tags", [""] * len(request.run_ids))
        if len(tags) != len(request.run_ids):
            raise HTTPException(status_code=400, detail="tags must match run_ids")
        outcomes = []
        base_spec = None
        for run_id, tag in zip(request.run_ids, tags):
            state = get_run(run_id)
            if state.status != "done":
                raise HTTPException(status_code=409, detail=f"run {run_id} not finished")
            base_spec = base_spec or state.spec
            outcomes.append(
                RunOutcome(
                    axes={},
                    tag=tag,
                    seed=state.config.seed,
                    result=RunResult(state.graph, state.config, state.records),
                )
            )
        try:
            rows = pipeline.aggregate(base_spec, outcomes)
        except (KeyError, ZeroDivisionError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.AnalyzeResponse(pipeline=request.pipeline, rows=_plain(rows))

    if ui_dir is not None:
        root = Path(ui_dir)
        if not (root / "index.html").is_file():
            raise FileNotFoundError(f"no index.html under {root}")
        app.mount("/", StaticFiles(directory=root, html=True), name="ui")

    return app


def _plain(rows):
    out = []
    for row in rows:
        clean = {}
        for key, value in row.items():
            if isinstance(value, (np.floating, np.integer)):
                value = value.item()
            clean[key] = value
        out.append(clean)
    return out
