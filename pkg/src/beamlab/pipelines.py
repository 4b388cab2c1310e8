"""Built-in analysis pipelines.

A pipeline couples a bundled experiment layout with the post-run estimators
that belong to it.  The sweep driver crosses any user parameter axes with
the pipeline's own plan (tomography bases, analyzer settings), executes one
run per point and seed, and hands the outcomes back for aggregation into
flat result rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analysis
from .components import NeutralDensityFilter, jones_matrix_of
from .constants import DELTA_T
from .dsl import ExperimentSpec
from .engine import RunResult
from .oracles import hom_powers


@dataclass
class RunOutcome:
    """One executed sweep point."""

    axes: dict  # user-swept assignments, e.g. {"meas.angle": 30.0}
    tag: str  # pipeline-plan tag ("" when the pipeline has no own axis)
    seed: int
    result: RunResult


def _first_params(spec: ExperimentSpec, cls, label: Optional[str] = None):
    for placement in spec.placements:
        if label is not None and placement.label == label:
            return placement.params
        if label is None and isinstance(placement.params, cls):
            return placement.params
    return None


def _drop_warmup(series: np.ndarray) -> np.ndarray:
    nonzero = np.nonzero(series)[0]
    return series[nonzero[0]:] if nonzero.size else series


def _axis_columns(outcome: RunOutcome) -> dict:
    row = dict(outcome.axes)
    row["seed"] = outcome.seed
    if outcome.tag:
        row["setting"] = outcome.tag
    return row


class Pipeline:
    name = ""
    fixture = ""

    def plan(self, spec: ExperimentSpec):
        return [("", {})]

    def aggregate(self, spec: ExperimentSpec, outcomes):
        raise NotImplementedError


class MalusPipeline(Pipeline):
    name = "malus"
    fixture = "malus"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            records = outcome.result.records
            power = _drop_warmup(records.powers[:, 0])
            rows.append(_axis_columns(outcome) | {"mean_power_W": float(power.mean())})
        return rows


class HomodynePipeline(Pipeline):
    name = "homodyne"
    fixture = "homodyne"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            records = outcome.result.records
            live = np.nonzero(records.powers.sum(axis=1))[0]
            p1 = records.power("PM1")[live[0]:]
            p2 = records.power("PM2")[live[0]:]
            x = p1 - p2
            rows.append(
                _axis_columns(outcome)
                | {
                    "difference_std_W": float(x.std(ddof=1)),
                    "sum_mean_W": float((p1 + p2).mean()),
                    "vacuum_power_estimate_W": analysis.homodyne_estimate(p1, p2),
                }
            )
        return rows


class LaserEfficiencyPipeline(Pipeline):
    name = "efficiency_laser"
    fixture = "efficiency_laser"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            run_spec_params = _first_params(spec, NeutralDensityFilter, "ndf")
            d = outcome.axes.get("ndf.d", run_spec_params.d if run_spec_params else 10.0)
            records = outcome.result.records
            counts = int(records.clicks.sum())
            duration = records.num_steps * DELTA_T
            eta = analysis.efficiency_laser(counts, float(d), 1e10, duration)
            rows.append(
                _axis_columns(outcome)
                | {"d": float(d), "counts": counts, "eta": eta, "invalid": eta > 1.0}
            )
        return rows


class HeraldedEfficiencyPipeline(Pipeline):
    name = "efficiency_heralded"
    fixture = "efficiency_heralded"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            table = outcome.result.table
            n1 = table.count("D1")
            n12 = table.count("D1", "D2")
            rows.append(
                _axis_columns(outcome)
                | {"n1": n1, "n12": n12, "eta": analysis.efficiency_heralded(n1, n12)}
            )
        return rows


def _min_subtracted_rows(rows, n1_key, n2_key):
    """Attach the sweep-wide min-subtracted probability per seed group."""

    by_seed: dict = {}
    for row in rows:
        by_seed.setdefault(row["seed"], []).append(row)
    for group in by_seed.values():
        p = analysis.born_probability_min_subtracted(
            [r[n1_key] for r in group], [r[n2_key] for r in group]
        )
        for row, value in zip(group, p):
            row["p1_subtracted"] = float(value)
    return rows


class BornPipeline(Pipeline):
    name = "born"
    fixture = "born"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            rows.append(
                _axis_columns(outcome)
                | {"counts": int(outcome.result.records.clicks.sum())}
            )
        return rows


class BornPbsPipeline(Pipeline):
    name = "born_pbs"
    fixture = "born_pbs"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            table = outcome.result.table
            n1, n2 = table.count("D1"), table.count("D2")
            row = _axis_columns(outcome) | {"n1": n1, "n2": n2}
            if n1 + n2:
                row["p1"] = analysis.born_probability(n1, n2)
            rows.append(row)
        return _min_subtracted_rows(rows, "n1", "n2")


class BornHeraldedPipeline(Pipeline):
    name = "born_heralded"
    fixture = "born_heralded"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            table = outcome.result.table
            n13 = table.count("D1", "D3")
            n23 = table.count("D2", "D3")
            row = _axis_columns(outcome) | {"n13": n13, "n23": n23}
            if n13 + n23:
                row["p1"] = analysis.born_probability(n13, n23)
            rows.append(row)
        return _min_subtracted_rows(rows, "n13", "n23")


class QstPipeline(Pipeline):
    """Three runs per point, one per Pauli basis, then linear inversion."""

    name = "qst"
    fixture = "qst"

    def plan(self, spec):
        plans = []
        for basis in ("X", "Y", "Z"):
            qwp, hwp = analysis.qst_basis_settings(basis)
            plans.append(
                (basis, {"meas_qwp.angle": qwp, "meas_hwp.angle": hwp})
            )
        return plans

    def aggregate(self, spec, outcomes):
        groups: dict = {}
        for outcome in outcomes:
            key = (tuple(sorted(outcome.axes.items())), outcome.seed)
            groups.setdefault(key, {})[outcome.tag] = outcome
        rows = []
        for (axes, seed), basis_runs in sorted(groups.items(), key=str):
            exps = {}
            for basis in ("X", "Y", "Z"):
                table = basis_runs[basis].result.table
                n1, n2 = table.count("D1"), table.count("D2")
                exps[basis] = (n1 - n2) / (n1 + n2) if n1 + n2 else 0.0
            state = analysis.qst_reconstruct(exps["X"], exps["Y"], exps["Z"])
            row = dict(axes) | {
                "seed": seed,
                "exp_x": exps["X"],
                "exp_y": exps["Y"],
                "exp_z": exps["Z"],
                "positive_semidefinite": state.positive_semidefinite,
            }
            ket = self._prepared_ket(basis_runs["Z"].result)
            if ket is not None:
                row["fidelity"] = state.fidelity(ket)
            rows.append(row)
        return rows

    @staticmethod
    def _prepared_ket(result: RunResult):
        hwp = qwp = None
        for node in result.graph.nodes:
            if node.label == "prep_hwp":
                hwp = node.params
            elif node.label == "prep_qwp":
                qwp = node.params
        if hwp is None or qwp is None:
            return None
        ket = np.array([1.0, 0.0], dtype=complex)
        return jones_matrix_of(qwp) @ (jones_matrix_of(hwp) @ ket)


class MzPipeline(Pipeline):
    name = "mz"
    fixture = "mz"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            graph = outcome.result.graph
            phi = graph.node_by_label("arm_pd").params.phi
            theta = graph.node_by_label("arm_hwp").params.theta
            d = graph.node_by_label("ndf").params.d
            dcr = graph.detectors()[0].params.dcr
            table = outcome.result.table
            n1, n2 = table.count("D1"), table.count("D2")
            steps = outcome.result.records.num_steps
            p1c, p2c = analysis.mz_probabilities(phi, theta, d, dcr)
            q1, _ = analysis.mz_quantum(phi, theta)
            delta = dcr * DELTA_T
            rows.append(
                _axis_columns(outcome)
                | {
                    "phi": phi,
                    "theta": theta,
                    "n1": n1,
                    "n2": n2,
                    "p1_hat": n1 / steps,
                    "p2_hat": n2 / steps,
                    "p1_closed": p1c,
                    "p2_closed": p2c,
                    "p1_subtracted_closed": analysis.mz_dark_subtracted(
                        p1c, p2c, delta, delta
                    ),
                    "q1": q1,
                }
            )
        return rows


class AnticorrelationPipeline(Pipeline):
    name = "anticorr"
    fixture = "anticorrelation"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            t = outcome.result.table
            n3 = t.count("D3")
            n13 = t.count("D1", "D3")
            n23 = t.count("D2", "D3")
            n123 = t.count("D1", "D2", "D3")
            row = _axis_columns(outcome) | {
                "n1": t.count("D1"),
                "n2": t.count("D2"),
                "n3": n3,
                "n12": t.count("D1", "D2"),
                "n13": n13,
                "n23": n23,
                "n123": n123,
            }
            if n13 and n23:
                row["alpha"] = analysis.anticorrelation_alpha(n3, n13, n23, n123)
            rows.append(row)
        return rows


class ChshPipeline(Pipeline):
    """Four analyzer settings per point; correlations from coincidences."""

    name = "chsh"
    fixture = "chsh"

    ALICE = (0.0, 22.5)
    BOB = (11.25, 78.75)

    def plan(self, spec):
        plans = []
        for i, alice in enumerate(self.ALICE, start=1):
            for j, bob in enumerate(self.BOB, start=1):
                plans.append(
                    (f"{i}{j}", {"alice_hwp.angle": alice, "bob_hwp.angle": bob})
                )
        return plans

    def aggregate(self, spec, outcomes):
        groups: dict = {}
        for outcome in outcomes:
            key = (tuple(sorted(outcome.axes.items())), outcome.seed)
            groups.setdefault(key, {})[outcome.tag] = outcome
        rows = []
        for (axes, seed), settings in sorted(groups.items(), key=str):
            counts = [[None, None], [None, None]]
            singles = 0
            valid = 0
            for tag, outcome in settings.items():
                t = outcome.result.table
                quad = (
                    t.count("D1", "D3"),
                    t.count("D1", "D4"),
                    t.count("D2", "D3"),
                    t.count("D2", "D4"),
                )
                counts[int(tag[0]) - 1][int(tag[1]) - 1] = quad
                valid += sum(quad)
                singles += sum(t.count(d) for d in ("D1", "D2", "D3", "D4"))
            c, s = analysis.chsh(counts)
            row = dict(axes) | {"seed": seed, "S": s}
            for i in range(2):
                for j in range(2):
                    row[f"C{i + 1}{j + 1}"] = float(c[i, j])
            row["valid_coincidences"] = valid
            row["singles"] = singles
            row["coincidence_efficiency"] = (
                valid / (valid + singles) if valid + singles else math.nan
            )
            rows.append(row)
        return rows


class HomPipeline(Pipeline):
    name = "hom"
    fixture = "hom"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            records = outcome.result.records
            phi = outcome.result.graph.node_by_label("pd").params.phi
            live = np.nonzero(records.powers.sum(axis=1))[0]
            p1 = records.power("PM1")[live[0]:].mean() if live.size else 0.0
            p2 = records.power("PM2")[live[0]:].mean() if live.size else 0.0
            pred1, pred2 = hom_powers(phi)
            rows.append(
                _axis_columns(outcome)
                | {
                    "phi": phi,
                    "pm1_W": float(p1),
                    "pm2_W": float(p2),
                    "predicted_pm1_W": pred1,
                    "predicted_pm2_W": pred2,
                }
            )
        return rows


class TeleportPipeline(Pipeline):
    name = "teleport"
    fixture = "teleport"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            t = outcome.result.table
            nh = t.count("D1", "D2", "D3")
            nv = t.count("D1", "D2", "D4")
            row = _axis_columns(outcome) | {"nh": nh, "nv": nv}
            if nh + nv:
                f, lo, hi = analysis.teleport_fidelity(nh, nv)
                row |= {"fidelity": f, "ci_low": lo, "ci_high": hi}
            rows.append(row)
        return rows


class BsaPipeline(Pipeline):
    name = "bsa"
    fixture = "bsa"

    def aggregate(self, spec, outcomes):
        rows = []
        for outcome in outcomes:
            table = outcome.result.table
            rows.append(
                _axis_columns(outcome)
                | {"classification": analysis.bsa_classify(table)}
                | {f"n_{'+'.join(labels)}": c for labels, c in table.pattern_items() if labels}
            )
        return rows


PIPELINES = {
    pipeline.name: pipeline
    for pipeline in (
        MalusPipeline(),
        HomodynePipeline(),
        LaserEfficiencyPipeline(),
        HeraldedEfficiencyPipeline(),
        BornPipeline(),
        BornPbsPipeline(),
        BornHeraldedPipeline(),
        QstPipeline(),
        MzPipeline(),
        AnticorrelationPipeline(),
        ChshPipeline(),
        HomPipeline(),
        TeleportPipeline(),
        BsaPipeline(),
    )
}
