import pytest

from beamlab.dsl import with_overrides
from beamlab.engine import simulate
from beamlab.pipelines import PIPELINES, RunOutcome


def run_pipeline(name, spec, axes_list=None, seeds=(0,), num_steps=None):
    pipeline = PIPELINES[name]
    outcomes = []
    for axes in axes_list or [{}]:
        for tag, plan_assignments in pipeline.plan(spec):
            for seed in seeds:
                run_spec = with_overrides(spec, {**axes, **plan_assignments})
                outcomes.append(
                    RunOutcome(
                        axes=axes,
                        tag=tag,
                        seed=seed,
                        result=simulate(run_spec, seed=seed, num_steps=num_steps),
                    )
                )
    return pipeline.aggregate(spec, outcomes)


def test_registry_names():
    assert set(PIPELINES) == {
        "malus",
        "homodyne",
        "efficiency_laser",
        "efficiency_heralded",
        "born",
        "born_pbs",
        "born_heralded",
        "qst",
        "mz",
        "anticorr",
        "chsh",
        "homodyne",
        "hom",
        "teleport",
        "bsa",
    }


def test_qst_pipeline_reconstructs_h(load_experiment):
    rows = run_pipeline("qst", load_experiment("qst"), num_steps=150000)
    (row,) = rows
    assert row["exp_z"] > 0.9
    assert abs(row["exp_x"]) < 0.1
    assert row["positive_semidefinite"]
    assert row["fidelity"] > 0.9


def test_chsh_pipeline_produces_bell_statistic(load_experiment):
    rows = run_pipeline("chsh", load_experiment("chsh"), seeds=(0, 1), num_steps=1000)
    assert len(rows) == 2
    for row in rows:
        assert {"S", "C11", "C22", "coincidence_efficiency"} <= set(row)
        assert 0.0 <= row["S"] <= 4.0


def test_mz_pipeline_reports_closed_forms(load_experiment):
    spec = load_experiment("mz")
    rows = run_pipeline("mz", spec, num_steps=50000)
    (row,) = rows
    assert row["phi"] == 0.0 and row["theta"] == 0.0
    assert row["q1"] == 1.0
    assert row["p1_closed"] > row["p2_closed"]


def test_homodyne_pipeline_estimates_vacuum(load_experiment):
    rows = run_pipeline("homodyne", load_experiment("homodyne"))
    (row,) = rows
    assert row["vacuum_power_estimate_W"] == pytest.approx(2e-13, rel=0.25)


def test_bsa_pipeline_classifies(load_experiment):
    rows = run_pipeline("bsa", load_experiment("bsa"), num_steps=1000)
    assert rows[0]["classification"] == "Psi_minus"


def test_born_pbs_pipeline_attaches_sweep_subtraction(load_experiment):
    spec = load_experiment("born_pbs")
    axes = [{"meas_hwp.angle": a} for a in (0.0, 22.5, 45.0)]
    rows = run_pipeline("born_pbs", spec, axes_list=axes, num_steps=50000)
    assert [r["p1_subtracted"] for r in rows] == pytest.approx([1.0, 0.5, 0.0], abs=0.03)
