from fractions import Fraction

import pytest

from core.cohomology_ring import validate_ring
from core.errors import DegenerateCubicError, RingFormatError, UnsupportedRingError
from core.ring_builders import (
    build_exterior_algebra, build_odd_lefschetz_ring, build_product, build_projective_space,
    build_six_manifold, build_sphere, cubic_kernel, diagonal_cubic, symmetric_cubic,
)


def test_projective_space_pontryagin_classes(p3):
    assert p3.name == "P3"
    assert p3.pontryagin[1] == p3.vector({"w^2": 4})
    assert p3.integrate(p3.power(p3.omega, 3)) == 1


def test_projective_space_rejects_m_zero():
    with pytest.raises(UnsupportedRingError):
        build_projective_space(0)


def test_product_names_and_pontryagin(p1xp2):
    names = p1xp2.basis.names
    assert {"a.w", "b.w", "b.w^2", "a.w*b.w", "a.w*b.w^2"} <= set(names)
    assert p1xp2.pontryagin[1] == p1xp2.vector({"b.w^2": 3})
    assert p1xp2.omega == p1xp2.vector({"a.w": 1, "b.w": 1})
    assert p1xp2.integrate(p1xp2.class_vector("a.w*b.w^2")) == 1


def test_product_of_odd_spheres_has_koszul_sign():
    ring = build_product(build_sphere(3), build_sphere(3))
    assert validate_ring(ring).is_valid
    assert ring.product("b.s", "a.s") == ring.product("a.s", "b.s") * -1
    assert ring.product("a.s", "b.s") == ring.class_vector("a.s*b.s")
    assert ring.omega is None


def test_exterior_algebra_signs():
    ring = build_exterior_algebra([1, 3])
    assert validate_ring(ring).is_valid
    assert ring.basis.names == ("1", "y1", "y3", "y1*y3")
    assert ring.product("y3", "y1") == ring.class_vector("y1*y3") * -1
    assert not ring.simply_connected
    with pytest.raises(UnsupportedRingError):
        build_exterior_algebra([2])


def test_u5_exterior_is_valid():
    ring = build_exterior_algebra([1, 3, 5, 7, 9])
    assert validate_ring(ring).is_valid
    assert len(ring) == 32
    assert ring.real_dimension == 25


def test_six_manifold_from_diagonal_cubic():
    ring = build_six_manifold(2, 2, diagonal_cubic(2))
    assert validate_ring(ring).is_valid
    assert ring.betti_numbers() == [1, 0, 2, 2, 2, 0, 1]
    assert ring.integrate(ring.power(ring.class_vector("a1"), 3)) == 1
    assert ring.integrate(ring.product("z1", "z-1")) == 1
    assert ring.omega == ring.class_vector("a1")


def test_degenerate_cubic_is_refused():
    cubic = {(1, 1, 1): 1}
    assert cubic_kernel(symmetric_cubic(cubic, 2), 2) == [[Fraction(0), Fraction(1)]]
    with pytest.raises(DegenerateCubicError):
        build_six_manifold(2, 0, cubic)
    ring = build_six_manifold(2, 0, cubic, check=False)
    # H^4 is the image of the cup product, so only one class survives
    assert ring.betti(4) == 1


def test_symmetric_cubic_rejects_conflicts():
    with pytest.raises(RingFormatError):
        symmetric_cubic({(1, 2, 2): 1, (2, 1, 2): 3}, 2)
    with pytest.raises(RingFormatError):
        symmetric_cubic({(1, 1, 4): 1}, 2)
    assert symmetric_cubic({(1, 1, 2): 2}, 2)[(2, 1, 1)] == 2


def test_six_manifold_omega_vector():
    ring = build_six_manifold(2, 0, diagonal_cubic(2), omega=[1, 1])
    assert ring.omega == ring.vector({"a1": 1, "a2": 1})
    with pytest.raises(RingFormatError):
        build_six_manifold(2, 0, diagonal_cubic(2), omega=[1])


def test_odd_lefschetz_ring_shape():
    ring = build_odd_lefschetz_ring(3, 5, 204)
    assert validate_ring(ring).is_valid
    assert ring.betti_numbers() == [1, 0, 1, 204, 1, 0, 1]
    assert ring.integrate(ring.product("z1", "z-1")) == 1
    assert ring.multiply(ring.omega, ring.class_vector("z1")).is_zero()
    with pytest.raises(UnsupportedRingError):
        build_odd_lefschetz_ring(3, 5, 3)
