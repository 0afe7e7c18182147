import io
import json

import pytest

from core.corpus import RingCorpus
from core.errors import RingFormatError, ResourceLimitError
from core.resource_guard import ResourceGuard
from utils.logger import Logger


def test_defaults_when_config_missing(tmp_path):
    """A missing engine config falls back to the built-in limits."""
    guard = ResourceGuard(str(tmp_path / "missing.json"))
    assert guard.max_basis_words == 2000000
    assert guard.max_derivation_basis == 400
    assert guard.default_truncation_padding == 2


def test_partial_config_is_merged(tmp_path):
    """Keys absent from the file keep their defaults."""
    path = tmp_path / "engine.json"
    path.write_text(json.dumps({"max_derivation_basis": 12}))
    guard = ResourceGuard(str(path))
    assert guard.max_derivation_basis == 12
    assert guard.representative_limit == 5000


def test_invalid_json_uses_defaults(tmp_path):
    path = tmp_path / "engine.json"
    path.write_text("{not json")
    assert ResourceGuard(str(path)).report_version == "1.0"


def test_environment_override(monkeypatch):
    """HOMOTOPY_MAX_BASIS_WORDS replaces the configured cap; junk values are ignored."""
    monkeypatch.setenv("HOMOTOPY_MAX_BASIS_WORDS", "7")
    assert ResourceGuard().max_basis_words == 7
    monkeypatch.setenv("HOMOTOPY_MAX_BASIS_WORDS", "lots")
    assert ResourceGuard().max_basis_words == 2000000


def test_tensor_budget(monkeypatch, p2):
    """The estimate is returned under the cap and refused above it."""
    guard = ResourceGuard()
    assert guard.check_tensor_budget(p2, 4, "E1") == 4
    monkeypatch.setenv("HOMOTOPY_MAX_BASIS_WORDS", "3")
    with pytest.raises(ResourceLimitError) as info:
        guard.check_tensor_budget(p2, 4, "E1")
    assert (info.value.estimate, info.value.cap) == (4, 3)
    assert info.value.affordable == 3
    assert "largest affordable truncation is 3" in str(info.value)
    assert guard.max_affordable_truncation(p2, limit=10) == 3


def test_budget_scaled_per_degree(monkeypatch, p2):
    """Loop homology to degree T needs words up to 2T; the refusal scales the affordable degree back."""
    monkeypatch.setenv("HOMOTOPY_MAX_BASIS_WORDS", "3")
    with pytest.raises(ResourceLimitError) as info:
        ResourceGuard().check_tensor_budget(p2, 2, "loop homology", per_degree=2)
    assert info.value.estimate == 4
    assert info.value.affordable == 1


def test_corpus_names_and_builds():
    """Every builtin ring builds and validates."""
    corpus = RingCorpus()
    assert {"P1", "P2", "P3", "P1xP2", "quintic", "cubic-threefold", "sixfold"} <= set(corpus.names())
    for ring in corpus.rings():
        assert ring.validation().is_valid, ring.name
    assert corpus.build("P1xP2").name == "P1xP2"
    assert corpus.build("quintic").betti(3) == 204


def test_corpus_sixfold_overrides():
    """b2/b3 overrides rebuild the six-manifold family member."""
    ring = RingCorpus().build("sixfold", b2=3, b3=4)
    assert ring.name == "sixfold(b2=3,b3=4)"
    assert ring.betti_numbers() == [1, 0, 3, 4, 3, 0, 1]
    assert ring.omega == ring.vector({"a1": 1, "a2": 1, "a3": 1})


def test_simply_connected_filter():
    names = [ring.name for ring in RingCorpus().rings(simply_connected_only=True)]
    assert "U5-exterior" not in names
    assert "P2" in names


def test_unknown_builtin():
    with pytest.raises(RingFormatError) as info:
        RingCorpus().build("K3")
    assert info.value.location == "--builtin"


def test_corpus_defaults_when_file_missing(tmp_path):
    corpus = RingCorpus(str(tmp_path / "none.json"))
    assert corpus.build("P3").betti_numbers() == [1, 0, 1, 0, 1, 0, 1]


def test_logger_writes_to_its_stream(monkeypatch):
    """Progress lines respect HOMOTOPY_QUIET; failures and structured events always print."""
    stream = io.StringIO()
    log = Logger(stream)
    log.log("hidden")
    log.fail("shown")
    log.structured("run_complete", command="validate")
    lines = stream.getvalue().splitlines()
    assert lines[0].strip() == "!! shown"
    assert json.loads(lines[1])["command"] == "validate"
    monkeypatch.setenv("HOMOTOPY_QUIET", "false")
    log.log("visible")
    assert stream.getvalue().splitlines()[-1] == "  - visible"
    log.increment_metric("words", 3)
    assert log.get_metrics() == {"words": 3}
