import pytest

from core.char_class import (
    CompleteIntersection, OmegaPoly, betti_numbers, chern_total, ci_report, ci_to_ring, distortion_dimension,
    euler_characteristic, hypersurface, hypersurface_family, kreck_su_report, middle_primitive_betti,
    monodromy_index_flag, pontryagin_condition, pontryagin_total, ring_distortion_dimension,
    threefold_middle_betti_closed_form,
)
from core.cohomology_ring import validate_ring
from core.errors import CompleteIntersectionError, UnsupportedRingError
from core.ring_builders import build_exterior_algebra, build_six_manifold, diagonal_cubic


def test_quintic_invariants():
    quintic = hypersurface(3, 5)
    assert chern_total(quintic) == [1, 0, 10, -40]
    assert str(chern_total(quintic)) == "1 + 10w^2 - 40w^3"
    assert euler_characteristic(quintic) == -200
    assert middle_primitive_betti(quintic) == 204
    assert pontryagin_total(quintic)[1] == {1: -20}
    assert distortion_dimension(quintic) == 204


def test_projective_space_as_empty_intersection():
    p3 = CompleteIntersection(3)
    assert euler_characteristic(p3) == 4
    assert pontryagin_total(p3)[1] == {1: 4}
    assert betti_numbers(p3) == [1, 0, 1, 0, 1, 0, 1]
    assert p3.label == "P3"


@pytest.mark.parametrize("d", range(1, 11))
def test_threefold_betti_matches_closed_form(d):
    assert middle_primitive_betti(hypersurface(3, d)) == threefold_middle_betti_closed_form(d)


def test_cubic_threefold_and_two_quadrics():
    assert distortion_dimension(hypersurface(3, 3)) == 10
    two_quadrics = CompleteIntersection(5, (2, 2))
    assert two_quadrics.degree == 4
    assert euler_characteristic(two_quadrics) == 0
    assert betti_numbers(two_quadrics)[3] == 4


def test_even_dimension_counts_the_hyperplane_power():
    surface = hypersurface(2, 4)
    assert euler_characteristic(surface) == 24
    assert betti_numbers(surface) == [1, 0, 22, 0, 1]


def test_monodromy_verdicts():
    assert monodromy_index_flag(3, 5).verdict == "infinite_index"
    assert monodromy_index_flag(7, 3).verdict == "infinite_index"
    assert monodromy_index_flag(3, 2).verdict == "not_applicable"
    assert monodromy_index_flag(4, 5).verdict == "not_determined"
    assert monodromy_index_flag(3, 5).citation == "monodromy-infinite-index"
    with pytest.raises(CompleteIntersectionError):
        monodromy_index_flag(2, 5)


def test_kreck_su_is_quoted():
    statement = kreck_su_report(hypersurface(3, 5))
    assert statement.value == 204
    assert "Kreck-Su" in statement.citation
    with pytest.raises(CompleteIntersectionError):
        kreck_su_report(hypersurface(5, 3))


def test_invalid_intersections():
    with pytest.raises(CompleteIntersectionError):
        CompleteIntersection(2, (2, 2))
    with pytest.raises(CompleteIntersectionError):
        CompleteIntersection(4, (0,))


def test_quintic_ring():
    ring = ci_to_ring(hypersurface(3, 5))
    assert validate_ring(ring).is_valid
    assert ring.betti_numbers() == [1, 0, 1, 204, 1, 0, 1]
    assert ring.pontryagin[1] == ring.vector({"w^2": -20})
    assert ring.integrate(ring.power(ring.omega, 3)) == 5
    with pytest.raises(UnsupportedRingError):
        ci_to_ring(hypersurface(2, 3))


def test_report_record():
    record = ci_report(hypersurface(3, 5)).record()
    assert record["euler"] == -200
    assert record["a1"] == -20
    assert record["r_closed_form"] == 204
    assert record["verdict"] == "infinite_index"
    assert record["H1_torelli"] == 204
    assert record["betti"] == "1 0 1 204 1 0 1"
    assert [report.middle_primitive for report in hypersurface_family(3, range(1, 4))] == [0, 0, 10]


def test_omega_poly_arithmetic():
    w = OmegaPoly([0, 1], 3)
    assert (OmegaPoly.one(3) + w).power(2) == [1, 2, 1, 0]
    assert (w * w * w * w) == [0, 0, 0, 0]
    assert OmegaPoly.linear_inverse(2, 2) == [1, -2, 4]
    assert OmegaPoly([1, 2, 3], 2).dual() == [1, -2, 3]


def test_pontryagin_condition(p3, p1xp2):
    """b1 = 0 and p_k ∈ Q·ω^2k decides whether the distortion dimension is available."""
    quintic = ci_to_ring(hypersurface(3, 5))
    assert pontryagin_condition(quintic) is True
    assert ring_distortion_dimension(quintic) == 204
    assert pontryagin_condition(p3) is True
    assert pontryagin_condition(p1xp2) is False
    assert pontryagin_condition(build_six_manifold(2, 2, diagonal_cubic(2))) is None
    assert pontryagin_condition(build_exterior_algebra([1, 3])) is False
