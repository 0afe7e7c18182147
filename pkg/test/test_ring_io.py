import json

import pytest

from core.corpus import RingCorpus
from core.errors import RingFormatError, RingValidationError
from core.ring_io import dumps_ring, load_ring, parse_ring, save_ring, serialize_ring

P2_DOCUMENT = {
    "name": "P2",
    "real_dimension": 4,
    "basis": [{"name": "1", "degree": 0}, {"name": "w", "degree": 2}, {"name": "w^2", "degree": 4}],
    "products": [{"left": "w", "right": "w", "result": [{"name": "w^2", "coeff_num": 1, "coeff_den": 1}]}],
    "integrate": [{"name": "w^2", "value": 1}],
    "omega": [{"name": "w", "coeff_num": 1}],
}


def test_parse_matches_builder(p2):
    ring = parse_ring(json.dumps(P2_DOCUMENT))
    assert ring.structure_table() == p2.structure_table()
    assert ring.omega == p2.omega
    assert ring.name == "P2"


@pytest.mark.parametrize("name", RingCorpus().names())
def test_corpus_rings_survive_serialization(name):
    ring = RingCorpus().build(name)
    again = parse_ring(dumps_ring(ring), validate=False)
    assert again == ring
    assert serialize_ring(again) == serialize_ring(ring)


def test_save_and_load(tmp_path, p1xp2):
    path = tmp_path / "ring.json"
    save_ring(p1xp2, str(path))
    assert load_ring(str(path)) == p1xp2


def test_missing_file_is_a_format_error(tmp_path):
    with pytest.raises(RingFormatError) as info:
        load_ring(str(tmp_path / "absent.json"))
    assert str(tmp_path) in info.value.location


def test_duplicate_basis_name_reports_location():
    document = dict(P2_DOCUMENT, basis=P2_DOCUMENT["basis"] + [{"name": "w", "degree": 2}])
    with pytest.raises(RingFormatError) as info:
        parse_ring(document)
    assert info.value.location == "basis[3]"


def test_missing_integrate_is_refused():
    document = {k: v for k, v in P2_DOCUMENT.items() if k != "integrate"}
    with pytest.raises(RingFormatError, match="fundamental class"):
        parse_ring(document)


def test_schema_errors():
    with pytest.raises(RingFormatError, match="unknown keys"):
        parse_ring(dict(P2_DOCUMENT, colour="blue"))
    with pytest.raises(RingFormatError) as info:
        parse_ring("{\n  \"real_dimension\": 4,\n")
    assert info.value.location.startswith("line")
    bad_value = dict(P2_DOCUMENT, integrate=[{"name": "w^2", "value": 0.5}])
    with pytest.raises(RingFormatError, match="exact rational"):
        parse_ring(bad_value)
    unknown = dict(P2_DOCUMENT, omega=[{"name": "v", "coeff_num": 1}])
    with pytest.raises(RingFormatError) as info:
        parse_ring(unknown)
    assert info.value.location == "omega[0]"


def test_fraction_strings_are_accepted():
    document = dict(P2_DOCUMENT, integrate=[{"name": "w^2", "value": "1/2"}])
    ring = parse_ring(document)
    assert ring.integrate(ring.class_vector("w^2")) * 2 == 1


def test_validation_can_be_deferred():
    document = dict(P2_DOCUMENT, products=[])
    ring = parse_ring(document, validate=False)
    assert "Poincaré duality" in ring.validation().names()
    with pytest.raises(RingValidationError):
        parse_ring(document)
