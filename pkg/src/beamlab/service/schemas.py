"""Request/response models for the local HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class DiagnosticOut(BaseModel):
    severity: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None
    x: Optional[int] = None
    y: Optional[int] = None


class PlacementOut(BaseModel):
    kind: str
    x: int
    y: int
    orientation: int
    label: Optional[str] = None
    params: dict


class PathEntryOut(BaseModel):
    source: str
    detector: str
    latency_steps: int


class ValidateRequest(BaseModel):
    dsl_text: str


class ValidateResponse(BaseModel):
    ok: bool
    diagnostics: list[DiagnosticOut]
    placements: list[PlacementOut]
    path_length_report: list[PathEntryOut]
    canonical_text: Optional[str] = None


class RunRequest(BaseModel):
    dsl_text: str
    seed: int = 0
    mode: str = "grid_latency"
    num_steps: Optional[int] = Field(default=None, ge=1)


class RunCreated(BaseModel):
    run_id: str


class RunStatus(BaseModel):
    run_id: str
    status: str  # queued | running | done | error
    progress: float
    num_steps: int
    error: Optional[str] = None
    meter_labels: list[str] = []
    detector_labels: list[str] = []
    detector_totals: Optional[dict] = None
    coincidence_table: Optional[dict] = None


class StepOut(BaseModel):
    step: int
    time_s: float
    powers: dict
    clicks: dict


class RecordsPage(BaseModel):
    run_id: str
    start: int
    stop: int
    steps: list[StepOut]


class FrameCellOut(BaseModel):
    x: int
    y: int
    h_re: float
    h_im: float
    v_re: float
    v_im: float
    power_W: float
    bloch: Optional[list[float]] = None


class FrameEdgeOut(BaseModel):
    edge_id: int
    src: str
    dst: Optional[str] = None
    cells: list[FrameCellOut]


class FrameResponse(BaseModel):
    run_id: str
    step: int
    edges: list[FrameEdgeOut]


class AnalyzeRequest(BaseModel):
    run_ids: list[str]
    pipeline: str
    params: dict = {}


class AnalyzeResponse(BaseModel):
    pipeline: str
    rows: list[dict]
