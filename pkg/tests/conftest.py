import numpy as np
import pytest

from sr_forge.imagecore import RasterImage


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h, w, c=3) -> RasterImage:
    return RasterImage(rng.random((h, w, c), dtype=np.float32))


def u8_image(rng, h, w, c=3) -> RasterImage:
    return RasterImage.from_u8(rng.integers(0, 256, size=(h, w, c), dtype=np.uint8))


ACCEPTANCE: dict[int, str] = {}


def report_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
