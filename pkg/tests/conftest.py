import numpy as np
import pytest
from click.testing import CliRunner

from fracblowup.config import settings
from fracblowup.models.mesh_domain import Domain, build_graded_mesh
from fracblowup.models.nonlinearity import NonlinearityModel
from fracblowup.schemas.nonlinearity import Family, NonlinearitySpec
from fracblowup.schemas.solve import MeshSpec, SolveConfig


@pytest.fixture
def power_model():
    return NonlinearityModel.power(2.5)


@pytest.fixture
def cubic_model():
    return NonlinearityModel.power(3.0)


@pytest.fixture
def interval_mesh():
    return build_graded_mesh(Domain.interval(), 32, 4.0)


@pytest.fixture
def fine_interval_mesh():
    return build_graded_mesh(Domain.interval(), 128, 4.0)


@pytest.fixture
def k_config():
    def make(p: float = 2.5, k: float = 2.0, n: int = 32, s: float = 0.5) -> SolveConfig:
        return SolveConfig(
            s=s,
            model=NonlinearitySpec(family=Family.POWER, p=p),
            mesh=MeshSpec(n=n),
            k=k,
        )

    return make


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def clean_settings(monkeypatch):
    """Reload settings after a test patches FRACBLOWUP_* variables."""
    yield monkeypatch
    monkeypatch.undo()
    settings.reload()


@pytest.fixture
def table_file(tmp_path):
    t = np.geomspace(1e-6, 1e8, 400)
    path = tmp_path / "cubic.csv"
    lines = ["# t,f"] + [f"{a:.17g},{a ** 3:.17g}" for a in t]
    path.write_text("\n".join(lines) + "\n")
    return path
