import json
from pathlib import Path

import numpy as np
import pytest

from hsfm.fan import build_fan
from hsfm.hgroup import GroupGrid

FROZEN_PATH = Path(__file__).parent / "oracles" / "frozen.json"

_VERDICTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[num])


@pytest.fixture
def criterion():
    """Record and print one pass/fail line for an acceptance criterion."""
    def record(num: int, ok: bool, detail: str):
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS[num] = line
        print(line)
        assert ok, line
    return record


def shifted_spectrum(F, u, s):
    """e^{-i lam (s + Im(u.conj(w))/2)} F(a, w - u) on the sample grid (n = 1)."""
    grid, fan = F.grid, F.fan
    steps = np.rint(np.r_[u.real, u.imag] / grid.h).astype(int)
    src = grid.flat_index(grid.digits - steps)
    w = grid.z[:, 0]
    phase = np.exp(-1j * fan.lambdas[:, None] * (s + 0.5 * np.imag(u * np.conj(w)))[None, :])
    return F.values[:, :, src] * phase[None]


@pytest.fixture(scope="session")
def frozen():
    return json.loads(FROZEN_PATH.read_text())


@pytest.fixture(scope="session")
def small():
    """Small Heisenberg-periodic grid: every integer shift is aligned."""
    grid = GroupGrid(1, 6.0, 12, 3.0, 24)
    return grid, build_fan(grid, 6)


@pytest.fixture(scope="session")
def default():
    grid = GroupGrid(1, 6.0, 24, 8.0, 48)
    return grid, build_fan(grid, 12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def band_items(default):
    from hsfm.verify import make_corpus
    grid, fan = default
    return make_corpus(11, grid, 2, fan, families=("band-limited",)).items
