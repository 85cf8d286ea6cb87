"""Shared fixtures: canonical tiny instances, a spying oracle, tmp files."""

import json

import numpy as np
import pytest

from subpar import CoverageInstance, CutInstance, MultilinearQuadraticInstance, SetOracle
from subpar.oracles import members_matrix


@pytest.fixture
def k2():
    """Single unit edge on two vertices: f = [0, 1, 1, 0] by mask."""
    return CutInstance(2, [(0, 1, 1.0)])


@pytest.fixture
def triangle():
    """Unit triangle: f(S) = 2 for proper nonempty S, 0 at the ends."""
    return CutInstance(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def tiny_coverage():
    # hand-computed: f by mask = [0, 2.5, 4, 4.5]
    return CoverageInstance(
        n=2, universe_size=3,
        covers={0: [0, 1], 1: [1, 2]},
        weights=[1.0, 2.0, 3.0],
        costs=[0.5, 1.0])


@pytest.fixture
def frozen_quad():
    """F(x) = x0 + x1 - x0*x1; vertices [0, 1, 1, 1], grad = (1-x1, 1-x0)."""
    return MultilinearQuadraticInstance(
        n=2, c=0.0, h=[1.0, 1.0], H=[[0.0, -1.0], [-1.0, 0.0]])


class SpySetOracle(SetOracle):
    """SetOracle that independently counts batches and rows.

    The accounting record is the instrument under test; the spy counts
    at the call boundary so the two can be cross-checked.
    """

    def __init__(self, instance, **kw):
        super().__init__(instance, **kw)
        self.batches = 0
        self.rows = 0

    def eval_batch(self, subsets):
        self.batches += 1
        self.rows += members_matrix(subsets, self.n).shape[0]
        return super().eval_batch(subsets)


@pytest.fixture
def spy_oracle():
    return SpySetOracle


@pytest.fixture
def write_instance(tmp_path):
    """Write an instance dict (or object) as a JSON file, return the path."""

    def _write(obj, name="inst.json", extra=None):
        d = obj if isinstance(obj, dict) else obj.to_json_dict()
        if extra:
            d = {**d, **extra}
        p = tmp_path / name
        p.write_text(json.dumps(d) + "\n")
        return str(p)

    return _write


# -- acceptance-criteria reporting -------------------------------------------
# test_acceptance.py registers one PASS/FAIL line per criterion here; the
# terminal-summary hook prints them so the final pytest output always shows
# the acceptance scoreboard.

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
