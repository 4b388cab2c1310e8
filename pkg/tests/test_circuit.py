from beamlab import components as comp
from beamlab.circuit import GridPlacement, path_length_report, route
from beamlab.dsl import parse
from beamlab.experiments import experiment_text


def malus_placements():
    return [
        GridPlacement(comp.Laser(), 1, 1),
        GridPlacement(comp.Polarizer(theta=30.0), 3, 1),
        GridPlacement(comp.PowerMeter(), 5, 1),
    ]


def test_malus_chain_routing():
    graph = route(malus_placements())
    assert graph.ok
    bound = [e for e in graph.edges if e.dst_node is not None]
    assert len(bound) == 2
    assert sorted(e.cells for e in bound) == [2, 2]
    assert sorted(e.latency_steps for e in bound) == [20, 20]
    # the power meter absorbs the beam, so nothing else leaves
    assert len(graph.edges) == 2


def test_empty_table():
    graph = route([])
    assert graph.ok
    assert graph.edges == []
    assert graph.nodes == []


def test_beam_leaving_table_terminates_silently():
    graph = route([GridPlacement(comp.Laser(), 1, 1)])
    assert graph.ok
    assert len(graph.edges) == 1
    assert graph.edges[0].dst_node is None
    assert not graph.detectors()


def test_routing_independent_of_placement_order():
    placements = malus_placements()
    forward = route(placements)
    backward = route(list(reversed(placements)))
    assert [n.label for n in forward.nodes] == [n.label for n in backward.nodes]
    assert forward.edges == backward.edges


def test_every_edge_path_is_collinear_and_clear():
    graph = route(parse(experiment_text("teleport")).spec.placements)
    occupied = {(n.x, n.y) for n in graph.nodes}
    for edge in graph.edges:
        cells = edge.cell_path
        for cell in cells:
            assert cell not in occupied
        if len(cells) > 1:
            xs = {c[0] for c in cells}
            ys = {c[1] for c in cells}
            assert len(xs) == 1 or len(ys) == 1


def test_edges_match_live_output_ports():
    graph = route(parse(experiment_text("bsa")).spec.placements)
    live_ports = {(e.src_node, e.src_port) for e in graph.edges}
    assert len(graph.edges) == len(live_ports)


def test_collision_detected():
    graph = route(
        [GridPlacement(comp.Laser(), 1, 1), GridPlacement(comp.Mirror(), 1, 1)]
    )
    assert not graph.ok
    assert any("overlap" in d.message for d in graph.diagnostics)


def test_side_hit_warns_and_terminates():
    # the second laser fires into the body of the first
    graph = route(
        [
            GridPlacement(comp.Laser(), 3, 1),
            GridPlacement(comp.Laser(), 1, 1),
        ]
    )
    assert graph.ok  # warnings only
    assert any(d.severity == "warning" for d in graph.diagnostics)


def test_entanglement_source_directions():
    spec = parse(experiment_text("efficiency_heralded")).spec
    graph = route(spec.placements)
    ent = graph.node_by_label("src")
    directions = {}
    for edge in graph.edges:
        if edge.src_node == ent.node_id:
            directions[edge.src_port] = edge.cell_path[0] if edge.cell_path else None
    # default LR: beam a heads left, beam b heads right
    assert directions["a"] == (ent.x - 1, ent.y)
    assert directions["b"] == (ent.x + 1, ent.y)


class TestPathLengthReport:
    def test_equal_arms_fixture_has_no_warnings(self):
        graph = route(parse(experiment_text("teleport")).spec.placements)
        report, warnings = path_length_report(graph)
        assert warnings == []
        totals = {latency for entries in report.values() for _, latency in entries}
        assert len(totals) == 1

    def test_unequal_arms_warn_with_difference(self, load_experiment, override):
        spec = load_experiment("anticorrelation")
        placements = [
            p if p.label != "D1" else p.__class__(p.params, p.x + 1, p.y, p.orientation, p.label)
            for p in spec.placements
        ]
        graph = route(placements)
        _, warnings = path_length_report(graph)
        assert len(warnings) == 1
        assert "difference 10" in warnings[0].message

    def test_no_sources_empty_report(self):
        graph = route([GridPlacement(comp.Detector(), 1, 1)])
        report, warnings = path_length_report(graph)
        assert report == {}
        assert warnings == []
