import random

import pytest

from beamlab import components as comp
from beamlab.circuit import GridPlacement
from beamlab.dsl import (
    ExperimentSpec,
    parse,
    resolve_component,
    serialize,
    set_param,
    with_overrides,
)
from beamlab.experiments import experiment_names, experiment_text

MALUS_TEXT = """# Malus's law experiment
num_seconds = 1e-3
offline_mode = False
Laser, x=1, y=1, orientation=0
Polarizer, x=3, y=1, orientation=0, angle=30
PowerMeter, x=5, y=1
"""


class TestParse:
    def test_malus_example(self):
        result = parse(MALUS_TEXT)
        assert result.ok
        spec = result.spec
        assert spec.num_seconds == 1e-3
        assert spec.offline_mode is False
        assert len(spec.placements) == 3
        kinds = [type(p.params).__name__ for p in spec.placements]
        assert kinds == ["Laser", "Polarizer", "PowerMeter"]
        assert spec.placements[1].params.theta == 30.0

    def test_empty_text_gives_defaults(self):
        result = parse("")
        assert result.ok
        assert result.spec.num_seconds == 1e-3
        assert result.spec.offline_mode is False
        assert result.spec.placements == []

    def test_unknown_key_reports_line(self):
        result = parse("Laser, x=1, y=1, bogus=3")
        assert not result.ok
        (diag,) = result.diagnostics
        assert diag.line == 1
        assert "bogus" in diag.message

    def test_unknown_kind(self):
        result = parse("Blaster, x=1, y=1")
        assert not result.ok
        assert "unknown component kind" in result.diagnostics[0].message

    def test_errors_collected_across_lines(self):
        text = "Laser, x=1\nPolarizer, x=2, y=1, angle=bad\nLED, x=3, y=3"
        result = parse(text)
        lines = [d.line for d in result.diagnostics if d.severity == "error"]
        assert lines == [1, 2]

    def test_missing_position_is_an_error(self):
        result = parse("Mirror, y=4")
        assert not result.ok
        assert "missing required key 'x'" in result.diagnostics[0].message

    def test_aliases_and_case_insensitivity(self):
        result = parse("bs, x=1, y=1\nPBS, x=3, y=1\nhwp, x=5, y=1\nndf, x=7, y=1")
        assert result.ok
        kinds = [type(p.params).__name__ for p in result.spec.placements]
        assert kinds == [
            "BeamSplitter",
            "PolarizingBeamSplitter",
            "HalfWavePlate",
            "NeutralDensityFilter",
        ]

    def test_whitespace_and_key_order_free(self):
        result = parse("Polarizer ,  y = 1,angle= 15 , x =3")
        assert result.ok
        placement = result.spec.placements[0]
        assert (placement.x, placement.y, placement.params.theta) == (3, 1, 15.0)

    def test_script_block_rejected(self):
        result = parse("<JS>\nLaser, x=1, y=1")
        assert not result.ok
        assert "sweep" in result.diagnostics[0].message

    def test_num_seconds_rounding_warns(self):
        result = parse("num_seconds = 1.05e-6")
        assert result.ok
        assert any(d.severity == "warning" for d in result.diagnostics)
        assert result.spec.num_seconds == pytest.approx(1e-6)

    def test_nonpositive_duration_rejected(self):
        assert not parse("num_seconds = 0").ok
        assert not parse("num_seconds = 2e-7").ok

    def test_entanglement_defaults_follow_type(self):
        spec = parse("ENT, x=1, y=1\nENT, x=3, y=1, type=II").spec
        assert spec.placements[0].params.varphi == 0.0
        assert spec.placements[1].params.varphi == 180.0

    def test_orientation_validated(self):
        assert not parse("Laser, x=1, y=1, orientation=45").ok

    def test_rotator_range_validated(self):
        assert not parse("Rotator, x=1, y=1, angle=91").ok

    def test_detector_dcr_validated(self):
        assert not parse("Detector, x=1, y=1, dcr=2000000").ok

    def test_bundled_experiments_parse_clean(self):
        for name in experiment_names():
            result = parse(experiment_text(name))
            assert result.ok, (name, [str(d) for d in result.diagnostics])

    def test_fuzz_never_raises(self):
        rnd = random.Random(1234)
        alphabet = "Laser,=xy123#\n <JS>(). \t-+eE_qwerty"
        for _ in range(500):
            text = "".join(rnd.choice(alphabet) for _ in range(rnd.randrange(0, 200)))
            parse(text)  # must not raise
        parse("\x00\xff binary ☃ garbage, x=?")


def _random_spec(rnd: random.Random) -> ExperimentSpec:
    makers = [
        lambda: comp.Laser(power=rnd.choice([4e-3, 1e-3]), polarization=rnd.choice("HVDARL")),
        lambda: comp.LED(power=rnd.choice([4e-3, 2e-3])),
        lambda: comp.Polarizer(theta=rnd.choice([0.0, 22.5, 45.0]), phi=rnd.choice([0.0, 90.0])),
        lambda: comp.PowerMeter(),
        lambda: comp.Detector(dcr=rnd.choice([1000.0, 1e5])),
        lambda: comp.BeamSplitter(r=rnd.choice([0.5, 2**-0.5])),
        lambda: comp.Mirror(),
        lambda: comp.PolarizingBeamSplitter(basis=rnd.choice(["HV", "DA", "RL"])),
        lambda: comp.HalfWavePlate(theta=rnd.choice([0.0, 22.5])),
        lambda: comp.QuarterWavePlate(theta=rnd.choice([0.0, 45.0])),
        lambda: comp.PhaseDelay(phi=rnd.choice([0.0, 33.5])),
        lambda: comp.Dephaser(),
        lambda: comp.TimeDelay(steps=rnd.randrange(0, 4)),
        lambda: comp.Rotator(theta=rnd.choice([0.0, 90.0])),
        lambda: comp.PhaseRetarder(phi=rnd.choice([0.0, -45.0])),
        lambda: comp.Depolarizer(),
        lambda: comp.NeutralDensityFilter(d=rnd.choice([10.0, 9.4])),
        lambda: comp.BeamBlocker(),
        lambda: comp.EntanglementSource(
            ent_type=rnd.choice(["I", "II"]),
            r=rnd.choice([1.0, 0.7]),
            varphi=rnd.choice([0.0, 180.0, 90.0]),
            directions=rnd.choice(["LR", "LU", "LD", "UR", "DR", "UD"]),
        ),
    ]
    cells = rnd.sample([(x, y) for x in range(12) for y in range(12)], rnd.randrange(0, 8))
    placements = [
        GridPlacement(
            rnd.choice(makers)(),
            x,
            y,
            rnd.choice([0, 90, 180, 270]),
            rnd.choice([None, f"c{i}"]),
        )
        for i, (x, y) in enumerate(cells)
    ]
    placements.sort(key=lambda p: (p.y, p.x))
    return ExperimentSpec(
        num_seconds=rnd.choice([1e-3, 1e-6, 0.5]),
        offline_mode=rnd.choice([True, False]),
        placements=placements,
    )


class TestSerialize:
    def test_round_trip_of_malus(self):
        spec = parse(MALUS_TEXT).spec
        again = parse(serialize(spec)).spec
        assert again.placements == spec.placements
        assert again.num_seconds == spec.num_seconds
        assert again.offline_mode == spec.offline_mode

    def test_defaults_are_omitted(self):
        text = serialize(parse("Laser, x=1, y=1, power=0.004, polarization=H").spec)
        assert text.strip() == "Laser, x=1, y=1"

    def test_line_order_canonicalized(self):
        a = parse("Laser, x=1, y=1\nMirror, x=3, y=1").spec
        b = parse("Mirror, x=3, y=1\nLaser, x=1, y=1").spec
        assert serialize(a) == serialize(b)

    def test_round_trip_generated_specs(self):
        rnd = random.Random(7)
        for _ in range(1000):
            spec = _random_spec(rnd)
            text = serialize(spec)
            parsed = parse(text)
            assert parsed.ok, text
            assert parsed.spec.placements == spec.placements, text
            assert parsed.spec.num_seconds == pytest.approx(spec.num_seconds)
            assert parsed.spec.offline_mode == spec.offline_mode


class TestOverrides:
    def test_resolve_by_id_and_kind(self):
        spec = parse(experiment_text("born_pbs")).spec
        assert resolve_component(spec, "meas_hwp") == resolve_component(spec, "hwp")
        assert resolve_component(spec, "detector2") != resolve_component(spec, "detector1")

    def test_set_param_by_kind_ordinal(self):
        spec = parse(MALUS_TEXT).spec
        updated = set_param(spec, "polarizer", "angle", 60.0)
        assert updated.placements[1].params.theta == 60.0
        assert spec.placements[1].params.theta == 30.0  # original untouched

    def test_set_param_validates_values(self):
        spec = parse(MALUS_TEXT).spec
        with pytest.raises(ValueError):
            set_param(spec, "laser", "power", "-5")
        with pytest.raises(KeyError):
            set_param(spec, "laser", "angle", "10")
        with pytest.raises(KeyError):
            set_param(spec, "detector", "dcr", "10")

    def test_with_overrides_dotted_keys(self):
        spec = parse(MALUS_TEXT).spec
        updated = with_overrides(spec, {"polarizer.angle": "45", "laser.power": 2e-3})
        assert updated.placements[1].params.theta == 45.0
        assert updated.placements[0].params.power == 2e-3
