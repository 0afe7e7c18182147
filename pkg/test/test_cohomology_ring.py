from fractions import Fraction

import pytest

from core.char_class import ci_to_ring, hypersurface
from core.cohomology_ring import (
    CohomologyRing, HomologyCoalgebra, coalgebra_primitives, reduced_coproduct, validate_ring,
)
from core.errors import RingValidationError
from core.exact_linear import GradedBasis


def make_ring(entries, products, integration, **kwargs):
    return CohomologyRing(kwargs.pop("real_dimension", 4), GradedBasis(entries), products, integration, **kwargs)


def test_projective_space_is_valid(p3):
    report = validate_ring(p3)
    assert report.is_valid
    assert p3.betti_numbers() == [1, 0, 1, 0, 1, 0, 1]
    assert report.notes["omega_top_nonzero"] is True


def test_product_ring_is_valid(p1xp2):
    assert validate_ring(p1xp2).is_valid
    assert p1xp2.betti_numbers() == [1, 0, 2, 0, 2, 0, 1]


def test_broken_duality_is_reported_with_witness_degrees():
    ring = make_ring([("1", 0), ("x", 2), ("y", 2), ("v", 4)],
                     {("x", "x"): {"v": 1}}, {"v": 1})
    report = validate_ring(ring)
    assert "Poincaré duality" in report.names()
    witness = [v.witness for v in report.violations if v.invariant == "Poincaré duality"]
    assert witness == [(2, 2)]
    with pytest.raises(RingValidationError) as info:
        ring.require_valid()
    assert info.value.report is report


def test_odd_square_breaks_graded_commutativity():
    ring = make_ring([("1", 0), ("a", 3), ("b", 3), ("v", 6)],
                     {("a", "b"): {"v": 1}, ("a", "a"): {"v": 1}}, {"v": 1}, real_dimension=6)
    assert "graded commutativity" in validate_ring(ring).names()


def test_missing_unit_and_degree_additivity():
    ring = make_ring([("x", 2), ("v", 4)], {("x", "x"): {"x": 1}}, {"v": 1})
    names = validate_ring(ring).names()
    assert "unit" in names
    assert "degree additivity" in names


def test_integration_off_top_degree():
    ring = make_ring([("1", 0), ("x", 2), ("v", 4)], {("x", "x"): {"v": 1}}, {"x": 1})
    assert "fundamental class" in validate_ring(ring).names()


def test_simply_connected_flag():
    ring = make_ring([("1", 0), ("t", 1), ("s", 1), ("v", 2)], {("t", "s"): {"v": 1}}, {"v": 1},
                     real_dimension=2)
    assert "simply connected" in validate_ring(ring).names()
    relaxed = make_ring([("1", 0), ("t", 1), ("s", 1), ("v", 2)], {("t", "s"): {"v": 1}}, {"v": 1},
                        real_dimension=2, simply_connected=False)
    assert validate_ring(relaxed).is_valid
    # the reversed product is inferred with the Koszul sign
    assert relaxed.product("s", "t").entries() == {3: Fraction(-1)}


def test_omega_outside_degree_two_is_rejected():
    ring = make_ring([("1", 0), ("x", 2), ("v", 4)], {("x", "x"): {"v": 1}}, {"v": 1}, omega={"v": 1})
    assert "omega" in validate_ring(ring).names()


def test_unit_products_are_implicit(p2):
    assert p2.multiply(p2.unit_vector(), p2.class_vector("w")) == p2.class_vector("w")
    assert p2.power(p2.class_vector("w"), 2) == p2.class_vector("w^2")
    assert p2.power(p2.class_vector("w"), 3).is_zero()
    assert p2.integrate(p2.class_vector("w^2")) == 1


def test_reduced_coproduct_of_p2(p2):
    coalgebra = reduced_coproduct(p2)
    w, w2 = p2.basis.index("w"), p2.basis.index("w^2")
    assert coalgebra.delta(w2) == {(w, w): Fraction(1)}
    assert coalgebra.delta(w) == {}
    assert len(coalgebra_primitives(p2, 2)) == 1
    assert coalgebra_primitives(p2, 4) == []
    assert coalgebra_primitives(p2, 9) == []
    assert coalgebra.coassociativity_defects() == []
    assert reduced_coproduct(p2) is coalgebra


def test_transpose_table_recovers_cup_products(p1xp2):
    table = HomologyCoalgebra(p1xp2).transpose_table()
    a, b = p1xp2.basis.index("a.w"), p1xp2.basis.index("b.w")
    assert table[(a, b)] == p1xp2.product_entries(a, b)


def test_product_ring_primitive_h4_vanishes(p1xp2):
    assert coalgebra_primitives(p1xp2, 4) == []
    assert len(coalgebra_primitives(p1xp2, 2)) == 2


def test_quintic_coalgebra_primitives():
    quintic = ci_to_ring(hypersurface(3, 5))
    assert len(coalgebra_primitives(quintic, 3)) == 204
    assert coalgebra_primitives(quintic, 4) == []


def test_structure_table_and_rename(p2):
    renamed = p2.rename({"w": "h", "w^2": "h^2"}, name="P2'")
    assert renamed.structure_table() == {("h", "h"): {"h^2": Fraction(1)}}
    assert renamed.name == "P2'"
    assert renamed != p2
    assert p2.rename({}) == p2


def test_summary(p2):
    assert p2.summary() == {"name": "P2", "real_dimension": 4, "betti": [1, 0, 1, 0, 1], "omega": True}
