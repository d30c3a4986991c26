from pathlib import Path

import numpy as np
import pytest

from sfdenoise import load_pgm

DATA = Path(__file__).parent / "data"
LENNA = DATA / "lena.pgm"

_acceptance_lines: list[str] = []


def record_criterion(name: str, ok: bool | None, detail: str) -> None:
    """Queue a summary line; ``ok=None`` marks a criterion this machine cannot measure."""
    status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
    line = f"{status}  {name}: {detail}"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def lenna():
    if not LENNA.exists():
        pytest.skip("tests/data/lena.pgm missing; run scripts/fetch_test_images.py")
    return load_pgm(LENNA)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def piecewise_constant(size=64, cell=8, seed=2024):
    """Square image of ``cell``-pixel tiles with uniform random gray levels."""
    levels = np.random.default_rng(seed).uniform(0, 255, (size // cell, size // cell))
    return np.kron(levels, np.ones((cell, cell)))


@pytest.fixture
def blocks_image():
    return piecewise_constant()
