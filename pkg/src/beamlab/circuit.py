"""Routing: turn placed components into a directed dataflow graph.

Beams travel rectilinearly (right, down, left, up) from component to
component.  Each edge records the Manhattan cell distance it spans; the
propagation latency is that distance times the per-cell step count.  Beams
that cross in free space ignore each other; beams that leave the table
terminate silently; beams that strike a non-port face of a component stop
with a warning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import components as comp
from .constants import CELL_LATENCY_STEPS
from .rng import MAX_NODE

RIGHT, DOWN, LEFT, UP = 0, 1, 2, 3
DIR_VECTORS = ((1, 0), (0, 1), (-1, 0), (0, -1))
DIR_NAMES = ("r", "d", "l", "u")
_LETTER_DIR = {"R": RIGHT, "D": DOWN, "L": LEFT, "U": UP}


def rotate(direction: int, orientation_deg: int) -> int:
    return (direction + orientation_deg // 90) % 4


@dataclass(frozen=True)
class GridPlacement:
    params: comp.ComponentParams
    x: int
    y: int
    orientation: int = 0  # degrees, multiples of 90
    label: Optional[str] = None


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    x: Optional[int] = None
    y: Optional[int] = None

    def __str__(self) -> str:
        where = f" at ({self.x}, {self.y})" if self.x is not None else ""
        return f"{self.severity}: {self.message}{where}"


@dataclass(frozen=True)
class Node:
    node_id: int
    params: comp.ComponentParams
    x: int
    y: int
    orientation: int
    label: str

    @property
    def kind(self) -> str:
        return type(self.params).__name__


@dataclass(frozen=True)
class Edge:
    edge_id: int
    src_node: int
    src_port: str
    dst_node: Optional[int]  # None when the beam leaves the table
    dst_port: Optional[str]
    cells: int  # Manhattan distance covered
    latency_steps: int
    cell_path: tuple  # cells traversed, destination cell excluded


@dataclass
class CircuitGraph:
    nodes: list
    edges: list
    diagnostics: list
    table_size: tuple
    cell_latency_steps: int = CELL_LATENCY_STEPS
    _in_edges: dict = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def edges_into(self, node_id: int):
        return self._in_edges.get(node_id, [])

    def node_by_label(self, label: str) -> Node:
        for node in self.nodes:
            if node.label == label:
                return node
        raise KeyError(label)

    def detectors(self):
        return [n for n in self.nodes if isinstance(n.params, comp.Detector)]

    def power_meters(self):
        return [n for n in self.nodes if isinstance(n.params, comp.PowerMeter)]

    def sources(self):
        return [n for n in self.nodes if isinstance(n.params, comp.SOURCE_KINDS)]


def _default_labels(placements) -> list:
    """Stable labels: user-provided id, else kind shorthand plus ordinal."""

    shorthand = {
        "Laser": "laser",
        "LED": "led",
        "Polarizer": "pol",
        "PowerMeter": "pm",
        "Detector": "det",
        "BeamSplitter": "bs",
        "Mirror": "mirror",
        "PolarizingBeamSplitter": "pbs",
        "HalfWavePlate": "hwp",
        "QuarterWavePlate": "qwp",
        "PhaseDelay": "pd",
        "Dephaser": "deph",
        "TimeDelay": "delay",
        "Rotator": "rot",
        "PhaseRetarder": "ret",
        "Depolarizer": "depol",
        "NeutralDensityFilter": "ndf",
        "BeamBlocker": "block",
        "EntanglementSource": "ent",
    }
    counters: dict = {}
    labels = []
    for placement in placements:
        if placement.label:
            labels.append(placement.label)
            continue
        base = shorthand[type(placement.params).__name__]
        counters[base] = counters.get(base, 0) + 1
        labels.append(f"{base}{counters[base]}")
    return labels


def _source_rays(node: Node):
    params = node.params
    if isinstance(params, (comp.Laser, comp.LED)):
        return [("out", rotate(RIGHT, node.orientation))]
    if isinstance(params, comp.EntanglementSource):
        da = _LETTER_DIR[params.directions[0].upper()]
        db = _LETTER_DIR[params.directions[1].upper()]
        return [("a", da), ("b", db)]
    return []


def _two_beam_ports(node: Node):
    """(accepted travel direction -> input port, output port -> direction)."""

    da = rotate(RIGHT, node.orientation)
    db = rotate(DOWN, node.orientation)
    return {da: "a", db: "b"}, {"a": da, "b": db}


def route(placements, table_size=None, cell_latency_steps: int = CELL_LATENCY_STEPS) -> CircuitGraph:
    """Trace every emitted beam to build the dataflow graph.

    The result is independent of the order of ``placements``: nodes are
    numbered in (y, x) scan order and tracing is breadth-first from sources
    in that order.
    """

    ordered = sorted(placements, key=lambda p: (p.y, p.x))
    labels = _default_labels(ordered)
    diagnostics: list = []

    if len(ordered) >= MAX_NODE:
        diagnostics.append(Diagnostic("error", f"too many components ({len(ordered)})"))
        return CircuitGraph([], [], diagnostics, table_size or (0, 0), cell_latency_steps)

    nodes = [
        Node(i, p.params, p.x, p.y, p.orientation, labels[i])
        for i, p in enumerate(ordered)
    ]

    if table_size is None:
        w = max((n.x for n in nodes), default=0) + 2
        h = max((n.y for n in nodes), default=0) + 2
        table_size = (w, h)
    width, height = table_size

    cell_map: dict = {}
    for node in nodes:
        if node.x < 0 or node.y < 0 or node.x >= width or node.y >= height:
            diagnostics.append(
                Diagnostic("error", f"component {node.label} out of bounds", node.x, node.y)
            )
        if (node.x, node.y) in cell_map:
            other = nodes[cell_map[(node.x, node.y)]]
            diagnostics.append(
                Diagnostic(
                    "error",
                    f"components {other.label} and {node.label} overlap",
                    node.x,
                    node.y,
                )
            )
        else:
            cell_map[(node.x, node.y)] = node.node_id

    if any(d.severity == "error" for d in diagnostics):
        return CircuitGraph(nodes, [], diagnostics, table_size, cell_latency_steps)

    edges: list = []
    bound_inputs: dict = {}  # (node_id, port) -> edge_id
    queued_outputs: set = set()
    queue: list = []

    def enqueue(node_id: int, port: str, direction: int) -> None:
        if (node_id, port) not in queued_outputs:
            queued_outputs.add((node_id, port))
            queue.append((node_id, port, direction))

    for node in nodes:
        for port, direction in _source_rays(node):
            enqueue(node.node_id, port, direction)

    def add_edge(src, src_port, dst, dst_port, cells, path) -> None:
        edge = Edge(
            len(edges),
            src,
            src_port,
            dst,
            dst_port,
            cells,
            cells * cell_latency_steps,
            tuple(path),
        )
        edges.append(edge)
        if dst is not None:
            bound_inputs[(dst, dst_port)] = edge.edge_id

    while queue:
        src_id, src_port, direction = queue.pop(0)
        src = nodes[src_id]
        dx, dy = DIR_VECTORS[direction]
        x, y = src.x, src.y
        path = []
        cells = 0
        while True:
            x, y = x + dx, y + dy
            cells += 1
            if not (0 <= x < width and 0 <= y < height):
                add_edge(src_id, src_port, None, None, cells, path)
                break
            hit = cell_map.get((x, y))
            if hit is None:
                path.append((x, y))
                continue
            target = nodes[hit]
            params = target.params

            if isinstance(params, comp.SINK_KINDS):
                add_edge(src_id, src_port, hit, "in", cells, path)
            elif isinstance(params, comp.PASSTHROUGH_KINDS):
                port = f"in_{DIR_NAMES[direction]}"
                if (hit, port) in bound_inputs:
                    diagnostics.append(
                        Diagnostic("error", f"port conflict at {target.label}", x, y)
                    )
                else:
                    add_edge(src_id, src_port, hit, port, cells, path)
                    enqueue(hit, f"out_{DIR_NAMES[direction]}", direction)
            elif isinstance(params, comp.TWO_BEAM_KINDS):
                accepts, emits = _two_beam_ports(target)
                port = accepts.get(direction)
                if port is None:
                    diagnostics.append(
                        Diagnostic(
                            "warning",
                            f"beam strikes the output face of {target.label}",
                            x,
                            y,
                        )
                    )
                elif (hit, port) in bound_inputs:
                    diagnostics.append(
                        Diagnostic("error", f"port conflict at {target.label}", x, y)
                    )
                else:
                    add_edge(src_id, src_port, hit, port, cells, path)
                    for out_port, out_dir in emits.items():
                        enqueue(hit, out_port, out_dir)
            else:  # a source struck from the side
                diagnostics.append(
                    Diagnostic("warning", f"beam strikes the body of {target.label}", x, y)
                )
            break

    graph = CircuitGraph(nodes, edges, diagnostics, table_size, cell_latency_steps)
    in_edges: dict = {}
    for edge in edges:
        if edge.dst_node is not None:
            in_edges.setdefault(edge.dst_node, []).append(edge)
    graph._in_edges = in_edges
    return graph


def path_length_report(graph: CircuitGraph):
    """Per-detector propagation totals from each source, plus mismatch warnings.

    Coincidence analyses assume every detector fed by a common source sits at
    the same total latency; a warning names any detector pair that is not.
    """

    out_edges: dict = {}
    for edge in graph.edges:
        out_edges.setdefault(edge.src_node, []).append(edge)

    report: dict = {}
    warnings: list = []

    for source in graph.sources():
        totals: dict = {}  # detector node_id -> set of latencies

        def walk(node_id: int, acc: int, visited: frozenset) -> None:
            for edge in out_edges.get(node_id, []):
                if edge.dst_node is None or edge.dst_node in visited:
                    continue
                total = acc + edge.latency_steps
                dst = graph.nodes[edge.dst_node]
                if isinstance(dst.params, comp.Detector):
                    totals.setdefault(dst.node_id, set()).add(total)
                else:
                    walk(edge.dst_node, total, visited | {edge.dst_node})

        walk(source.node_id, 0, frozenset({source.node_id}))
        for det_id, latencies in totals.items():
            report.setdefault(det_id, []).extend(
                (source.node_id, latency) for latency in sorted(latencies)
            )

        flat = sorted(
            (latency, det_id) for det_id, latencies in totals.items() for latency in latencies
        )
        if flat and flat[0][0] != flat[-1][0]:
            lo, det_lo = flat[0]
            hi, det_hi = flat[-1]
            warnings.append(
                Diagnostic(
                    "warning",
                    f"unequal paths from {source.label}: "
                    f"{graph.nodes[det_lo].label} at {lo} steps vs "
                    f"{graph.nodes[det_hi].label} at {hi} steps "
                    f"(difference {hi - lo})",
                    source.x,
                    source.y,
                )
            )
    return report, warnings
