import numpy as np
import pytest

from oagrade import pipeline, synth
from oagrade.imagecore import GrayImage
from oagrade.neuralnet import MlpConfig


def random_gray(rng, width=200, height=150):
    return GrayImage(rng.integers(0, 256, size=(height, width), dtype=np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    synth.generate(synth.SynthSpec(seed=3), out)
    return out


@pytest.fixture(scope="session")
def manifest(synth_dir):
    return pipeline.load_manifest(synth_dir / "manifest.csv")


@pytest.fixture(scope="session")
def trained(manifest):
    bundle, history = pipeline.train_pipeline(manifest, MlpConfig(rng_seed=3))
    return bundle, history


_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        _CRITERIA[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        status = "PASS" if _CRITERIA[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
