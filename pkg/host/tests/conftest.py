import pytest

fabricsim = pytest.importorskip("fabricsim", reason="host tests need the simulation package")

from fabricsim import bundled_overlay, write_pgm  # noqa: E402
from fabricsim.corpus import synthetic_image  # noqa: E402


@pytest.fixture(scope="session")
def overlay_path():
    return bundled_overlay("edge_detect")


@pytest.fixture(scope="session")
def loopback_path():
    return bundled_overlay("loopback")


@pytest.fixture(scope="session")
def small_image_path(tmp_path_factory):
    img = synthetic_image(width=96, height=64, seed=11)
    path = tmp_path_factory.mktemp("img") / "small.pgm"
    write_pgm(img, path)
    return str(path)


@pytest.fixture(scope="session")
def medium_image_path(tmp_path_factory):
    img = synthetic_image(width=512, height=384, seed=12)
    path = tmp_path_factory.mktemp("img") / "medium.pgm"
    write_pgm(img, path)
    return str(path)
