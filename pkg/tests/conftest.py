"""Shared fixtures and the acceptance-criteria reporter."""

import dataclasses

import pytest

from beamlab import dsl
from beamlab.experiments import experiment_text

_ACCEPTANCE_RESULTS = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_RESULTS.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number:2d}: {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def load_experiment():
    def _load(name: str) -> dsl.ExperimentSpec:
        result = dsl.parse(experiment_text(name))
        assert result.ok, [str(d) for d in result.diagnostics]
        return result.spec

    return _load


@pytest.fixture
def override():
    """Replace labeled components' parameters on a copy of a spec."""

    def _override(spec, **label_params):
        placements = []
        for placement in spec.placements:
            if placement.label in label_params:
                params = dataclasses.replace(
                    placement.params, **label_params[placement.label]
                )
                placement = dataclasses.replace(placement, params=params)
            placements.append(placement)
        return dataclasses.replace(spec, placements=placements)

    return _override
