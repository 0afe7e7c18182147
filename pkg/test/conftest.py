import os
import pytest

from utils.logger import logger

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture(autouse=True)
def engine_env(monkeypatch):
    # Config paths independent of the working directory, and a quiet logger
    monkeypatch.setenv('HOMOTOPY_ENGINE_CONFIG', os.path.join(ROOT, 'config', 'engine_config.json'))
    monkeypatch.setenv('HOMOTOPY_BUILTINS_PATH', os.path.join(ROOT, 'config', 'builtin_rings.json'))
    monkeypatch.setenv('HOMOTOPY_QUIET', 'true')
    monkeypatch.delenv('HOMOTOPY_MAX_BASIS_WORDS', raising=False)
    logger.reset_metrics()
    yield


@pytest.fixture
def p2():
    from core.ring_builders import build_projective_space
    return build_projective_space(2)


@pytest.fixture
def p3():
    from core.ring_builders import build_projective_space
    return build_projective_space(3)


@pytest.fixture
def p1xp2():
    from core.ring_builders import build_product, build_projective_space
    return build_product(build_projective_space(1), build_projective_space(2))
