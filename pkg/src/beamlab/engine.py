"""Deterministic execution of a routed circuit graph.

Semantics per step t: every source draws fresh keyed samples; every edge
transports samples with its propagation latency (the value before anything
has arrived is the exact zero field); combiner ports with no incoming edge
receive fresh vacuum; detectors and meters read once per step.  Because all
randomness is keyed by (seed, node, step, draw), the whole run is a pure
function of (graph, config) and any step can be recomputed in isolation.

Execution is vectorized over blocks of steps.  Each output port keeps a
sliding window ("ring") of its recent samples, long enough to serve the
largest latency in the graph, so memory stays flat no matter how long the
run is.  Acyclic graphs use large blocks filled in topological order; a
graph with a feedback loop falls back to blocks no longer than the shortest
latency, which makes every in-block read strictly historical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import components as comp
from . import rng
from .circuit import CircuitGraph, Edge, Node, route
from .constants import CELL_LATENCY_STEPS, SIGMA0
from .polarization import haar_random_unitary
from .recorder import CoincidenceTable, RunRecords, tabulate

GRID_LATENCY = "grid_latency"
INSTANT = "instant"

_BLOCK = 1 << 16

# Draw-index layout within each node's per-step key space.
_DRAW_SOURCE = 0  # sources use up to 8 draws; dephaser 1; depolarizer 4
_DRAW_LOSSY = 8  # + 4 * entry-direction index, 4 draws per traversal
_DRAW_PORT_A = 24  # vacuum for an unbound combiner port / dark sink
_DRAW_PORT_B = 28


class EngineError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    num_steps: int = 1000
    cell_latency_steps: int = CELL_LATENCY_STEPS
    propagation_mode: str = GRID_LATENCY

    def __post_init__(self) -> None:
        if self.num_steps < 1 or self.num_steps >= rng.MAX_STEP:
            raise ValueError(f"num_steps out of range: {self.num_steps}")
        if self.cell_latency_steps < 1:
            raise ValueError("cell_latency_steps must be at least 1")
        if self.propagation_mode not in (GRID_LATENCY, INSTANT):
            raise ValueError(f"unknown propagation mode {self.propagation_mode!r}")


@dataclass(frozen=True)
class FrameCell:
    x: int
    y: int
    jones: tuple  # ((h.re, h.im), (v.re, v.im))


@dataclass(frozen=True)
class FrameEdge:
    edge_id: int
    src_label: str
    dst_label: Optional[str]
    cells: tuple  # FrameCell per traversed cell, source-adjacent first


@dataclass(frozen=True)
class FieldFrame:
    step: int
    edges: tuple


@dataclass
class _Plan:
    order: list  # nodes in evaluation order
    eff_latency: dict  # edge_id -> steps
    lookback: int
    block: int
    ring_ports: set  # (node_id, port) needing an output ring


def _build_plan(graph: CircuitGraph, config: RunConfig, num_steps: int) -> _Plan:
    if not graph.ok:
        errors = "; ".join(str(d) for d in graph.diagnostics if d.severity == "error")
        raise EngineError(f"cannot run an invalid circuit: {errors}")

    instant = config.propagation_mode == INSTANT
    eff_latency = {}
    for edge in graph.edges:
        eff_latency[edge.edge_id] = 0 if instant else edge.cells * config.cell_latency_steps

    delays = [
        node.params.steps
        for node in graph.nodes
        if isinstance(node.params, comp.TimeDelay)
    ]
    max_delay = 0 if instant or not delays else max(delays)
    lookback = max([0, *eff_latency.values()]) + max_delay

    # topological order over consuming edges
    indeg = {node.node_id: 0 for node in graph.nodes}
    out_adj: dict = {node.node_id: [] for node in graph.nodes}
    for edge in graph.edges:
        if edge.dst_node is not None:
            indeg[edge.dst_node] += 1
            out_adj[edge.src_node].append(edge.dst_node)
    ready = [n for n, d in indeg.items() if d == 0]
    order_ids: list = []
    while ready:
        ready.sort()
        nid = ready.pop(0)
        order_ids.append(nid)
        for dst in out_adj[nid]:
            indeg[dst] -= 1
            if indeg[dst] == 0:
                ready.append(dst)
    cyclic = len(order_ids) != len(graph.nodes)

    block = min(_BLOCK, num_steps)
    if cyclic:
        if instant:
            raise EngineError("instant propagation is undefined for a feedback loop")
        min_lat = min(eff_latency[e.edge_id] for e in graph.edges if e.dst_node is not None)
        block = max(1, min(block, min_lat))
        order_ids = [node.node_id for node in graph.nodes]

    ring_ports = {(e.src_node, e.src_port) for e in graph.edges}
    order = [graph.nodes[nid] for nid in order_ids]
    return _Plan(order, eff_latency, lookback, block, ring_ports)


class _Execution:
    """One pass over the step range, shared by run() and frame_at()."""

    def __init__(self, graph: CircuitGraph, config: RunConfig, num_steps: int):
        self.graph = graph
        self.config = config
        self.num_steps = num_steps
        self.plan = _build_plan(graph, config, num_steps)
        self.instant = config.propagation_mode == INSTANT

        width = self.plan.lookback + self.plan.block
        self.rings = {
            port: np.zeros((width, 2), dtype=complex) for port in self.plan.ring_ports
        }
        self.in_edges: dict = {}
        for edge in graph.edges:
            if edge.dst_node is not None:
                self.in_edges.setdefault(edge.dst_node, []).append(edge)

        meters = graph.power_meters()
        detectors = graph.detectors()
        self.records = RunRecords.empty(
            num_steps, [n.label for n in meters], [n.label for n in detectors]
        )
        self.meter_col = {n.node_id: i for i, n in enumerate(meters)}
        self.det_col = {n.node_id: i for i, n in enumerate(detectors)}
        self.det_gamma = {
            n.node_id: comp.threshold_from_dcr(n.params.dcr) for n in detectors
        }

    # -- helpers ----------------------------------------------------------

    def _vacuum(self, node_id: int, steps: np.ndarray, draw: int) -> np.ndarray:
        return SIGMA0 * rng.gaussian_pair(self.config.seed, node_id, steps, draw)

    def _gather(self, edge: Edge, t0: int, size: int, extra_delay: int = 0) -> np.ndarray:
        """View of the samples arriving over [t0, t0+size) through this edge."""

        lat = self.plan.eff_latency[edge.edge_id] + (0 if self.instant else extra_delay)
        offset = self.plan.lookback - lat
        ring = self.rings[(edge.src_node, edge.src_port)]
        return ring[offset : offset + size]

    def _inputs(self, node: Node, t0: int, size: int, extra_delay: int = 0) -> dict:
        gathered: dict = {}
        for edge in self.in_edges.get(node.node_id, []):
            gathered.setdefault(edge.dst_port, []).append(
                self._gather(edge, t0, size, extra_delay)
            )
        return gathered

    def _emit(self, node_id: int, port: str, size: int, values: np.ndarray) -> None:
        ring = self.rings.get((node_id, port))
        if ring is not None:
            ring[self.plan.lookback : self.plan.lookback + size] = values

    # -- node evaluation ---------------------------------------------------

    def _eval_node(self, node: Node, t0: int, size: int, steps: np.ndarray) -> None:
        params = node.params
        seed = self.config.seed
        nid = node.node_id

        if isinstance(params, (comp.Laser, comp.LED)):
            out = comp.sample_source(params, rng.RngKey(seed, nid, steps, _DRAW_SOURCE))
            self._emit(nid, "out", size, out)
            return

        if isinstance(params, comp.EntanglementSource):
            a, b = comp.sample_source(params, rng.RngKey(seed, nid, steps, _DRAW_SOURCE))
            self._emit(nid, "a", size, a)
            self._emit(nid, "b", size, b)
            return

        if isinstance(params, comp.TWO_BEAM_KINDS):
            inputs = self._inputs(node, t0, size)
            a_in = inputs.get("a", [None])[0]
            b_in = inputs.get("b", [None])[0]
            if a_in is None:
                a_in = self._vacuum(nid, steps, _DRAW_PORT_A)
            if b_in is None:
                b_in = self._vacuum(nid, steps, _DRAW_PORT_B)
            a_out, b_out = comp.apply_two_beam(params, a_in, b_in)
            self._emit(nid, "a", size, a_out)
            self._emit(nid, "b", size, b_out)
            return

        if isinstance(params, comp.Detector):
            beams = self.in_edges.get(nid, ())
            gamma = self.det_gamma[nid]
            if beams:
                click = np.zeros(size, dtype=bool)
                for edge in beams:
                    click |= comp.clicks_over_threshold(
                        self._gather(edge, t0, size), gamma
                    )
            else:
                click = comp.clicks_over_threshold(
                    self._vacuum(nid, steps, _DRAW_PORT_A), gamma
                )
            self.records.clicks[t0 : t0 + size, self.det_col[nid]] = click
            return

        if isinstance(params, comp.PowerMeter):
            beams = self.in_edges.get(nid, ())
            if beams:
                power = None
                for edge in beams:
                    p = comp.beam_power(self._gather(edge, t0, size))
                    power = p if power is None else np.maximum(power, p)
            else:
                power = comp.beam_power(self._vacuum(nid, steps, _DRAW_PORT_A))
            self.records.powers[t0 : t0 + size, self.meter_col[nid]] = comp.quantize_power(power)
            return

        if isinstance(params, comp.TimeDelay):
            inputs = self._inputs(node, t0, size, extra_delay=params.steps)
            for port, values in inputs.items():
                self._emit(nid, "out" + port[2:], size, values[0])
            return

        # single-beam pass-through elements, possibly traversed from several
        # directions in the same step
        inputs = self._inputs(node, t0, size)
        if not inputs:
            return

        if isinstance(params, comp.LOSSY_KINDS):
            for port, values in inputs.items():
                dir_index = "rdlu".index(port[3])
                z = rng.gaussian_pair(seed, nid, steps, _DRAW_LOSSY + 4 * dir_index)
                if isinstance(params, comp.NeutralDensityFilter):
                    out = comp.ndf_output(params.d, values[0], z)
                elif isinstance(params, comp.BeamBlocker):
                    out = comp.blocker_output(z)
                else:
                    out = comp.polarizer_output(params.theta, params.phi, values[0], z)
                self._emit(nid, "out" + port[2:], size, out)
            return

        if isinstance(params, comp.Dephaser):
            u = rng.uniform(seed, nid, steps, _DRAW_SOURCE)
            factor = np.exp(2j * np.pi * u)[:, None]
            for port, values in inputs.items():
                self._emit(nid, "out" + port[2:], size, values[0] * factor)
            return

        if isinstance(params, comp.Depolarizer):
            draws = [rng.uniform(seed, nid, steps, _DRAW_SOURCE + i) for i in range(4)]
            unitary = haar_random_unitary(
                draws[0],
                2.0 * np.pi * draws[1],
                2.0 * np.pi * draws[2],
                2.0 * np.pi * draws[3],
            )
            for port, values in inputs.items():
                out = np.einsum("tij,tj->ti", unitary, values[0])
                self._emit(nid, "out" + port[2:], size, out)
            return

        matrix = comp.jones_matrix_of(params)
        for port, values in inputs.items():
            self._emit(nid, "out" + port[2:], size, values[0] @ matrix.T)

    # -- main loop ---------------------------------------------------------

    def execute(
        self,
        upto: Optional[int] = None,
        progress: Optional[Callable[[float], None]] = None,
        capture_step: Optional[int] = None,
    ) -> Optional[FieldFrame]:
        end = self.num_steps if upto is None else upto
        lookback, block = self.plan.lookback, self.plan.block
        frame = None
        t0 = 0
        while t0 < end:
            size = min(block, end - t0)
            for ring in self.rings.values():
                ring[:lookback] = ring[block : block + lookback].copy()
            steps = np.arange(t0, t0 + size, dtype=np.uint64)
            for node in self.plan.order:
                self._eval_node(node, t0, size, steps)
            if capture_step is not None and t0 <= capture_step < t0 + size:
                frame = self._capture(capture_step, t0)
            t0 += size
            if progress is not None:
                progress(t0 / end)
        return frame

    def _capture(self, step: int, block_start: int) -> FieldFrame:
        cell_latency = 0 if self.instant else self.config.cell_latency_steps
        edges_out = []
        for edge in self.graph.edges:
            ring = self.rings[(edge.src_node, edge.src_port)]
            base = block_start - self.plan.lookback
            cells = []
            for c, (x, y) in enumerate(edge.cell_path):
                emitted = step - c * cell_latency
                if emitted < 0:
                    jones = np.zeros(2, dtype=complex)
                else:
                    jones = ring[emitted - base]
                cells.append(
                    FrameCell(
                        x,
                        y,
                        (
                            (float(jones[0].real), float(jones[0].imag)),
                            (float(jones[1].real), float(jones[1].imag)),
                        ),
                    )
                )
            src_label = self.graph.nodes[edge.src_node].label
            dst_label = (
                self.graph.nodes[edge.dst_node].label if edge.dst_node is not None else None
            )
            edges_out.append(FrameEdge(edge.edge_id, src_label, dst_label, tuple(cells)))
        return FieldFrame(step, tuple(edges_out))


def run(
    graph: CircuitGraph,
    config: RunConfig,
    progress: Optional[Callable[[float], None]] = None,
) -> RunRecords:
    """Execute the full run and return the per-step records."""

    execution = _Execution(graph, config, config.num_steps)
    execution.execute(progress=progress)
    return execution.records


def frame_at(graph: CircuitGraph, config: RunConfig, step: int) -> FieldFrame:
    """In-flight field state at one step, recomputed from scratch.

    Replay-deterministic: any sequence of frame_at calls, in any order,
    returns identical frames for identical steps.
    """

    if not 0 <= step < config.num_steps:
        raise ValueError(f"step {step} outside run of {config.num_steps} steps")
    execution = _Execution(graph, config, config.num_steps)
    frame = execution.execute(upto=step + 1, capture_step=step)
    assert frame is not None
    return frame


@dataclass
class RunResult:
    """A completed run: the routed graph, its config, and the records."""

    graph: CircuitGraph
    config: RunConfig
    records: RunRecords
    _table: Optional[CoincidenceTable] = field(default=None, repr=False)

    @property
    def table(self) -> CoincidenceTable:
        if self._table is None:
            self._table = tabulate(self.records)
        return self._table


def simulate(
    exp_spec,
    *,
    seed: int = 0,
    num_steps: Optional[int] = None,
    mode: str = GRID_LATENCY,
    cell_latency_steps: int = CELL_LATENCY_STEPS,
    table_size=None,
    progress: Optional[Callable[[float], None]] = None,
) -> RunResult:
    """Route and execute a parsed experiment in one call."""

    graph = route(exp_spec.placements, table_size, cell_latency_steps)
    config = RunConfig(
        seed=seed,
        num_steps=num_steps if num_steps is not None else exp_spec.num_steps,
        cell_latency_steps=cell_latency_steps,
        propagation_mode=mode,
    )
    records = run(graph, config, progress=progress)
    return RunResult(graph, config, records)
