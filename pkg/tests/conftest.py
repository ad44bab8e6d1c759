import numpy as np
import pytest

from gerbes.cech import CoverNerve
from gerbes.complex import Chain
from gerbes.connection import build_from_integer_class, generator_class
from gerbes.gerbe import GerbePresentation
from gerbes.meshes import s3_mesh


class S3Setup:
    """Level-12 model of the 3-sphere with its coordinate-chart cover."""

    def __init__(self):
        self.mesh = s3_mesh(12)
        self.complex = self.mesh.complex
        self.cover = CoverNerve(self.complex, self.mesh.coordinate_charts())
        self.fundamental = Chain.fundamental(self.complex)
        self._gerbes = {}

    def class_gerbe(self, k: int) -> GerbePresentation:
        if k not in self._gerbes:
            g = build_from_integer_class(self.cover, generator_class(self.cover.nerve, k))
            self._gerbes[k] = GerbePresentation(self.cover, g)
        return self._gerbes[k]

    def refining_cover(self) -> CoverNerve:
        """Coordinate charts plus a small ball around an interior vertex."""
        K = self.complex
        centre = next(i for i, x in enumerate(self.mesh.coordinates) if x[4] == 0 and min(x[:4]) >= 3)
        ball = {centre} | set(K.edge_graph()[centre].indices.tolist())
        return CoverNerve(K, self.mesh.coordinate_charts() + [[K.vertices[i] for i in sorted(ball)]])

    def coarse_ball(self, *cells) -> Chain:
        total = Chain.zero(self.complex, 3)
        for cell in cells:
            total = total + self.mesh.cell_chain(cell, self.fundamental)
        return total


@pytest.fixture(scope="session")
def s3():
    return S3Setup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report(capsys):
    """Print one line straight to the terminal, bypassing capture."""

    def emit(line: str) -> None:
        with capsys.disabled():
            print(f"\n{line}")

    return emit
