import random
from fractions import Fraction
from itertools import product

import pytest

from core.adams_loop import estimate_e1_size, homotopy_ranks
from core.char_class import ci_to_ring, hypersurface
from core.corpus import RingCorpus
from core.errors import DegenerateCubicError, TruncationError, UnsupportedRingError
from core.lie_model import (
    LieElement, bracket, dump_model, is_lie_element, left_normed, lie_homology, quadratic_model_from_ring,
    sixfold_model,
)
from core.ring_builders import build_exterior_algebra, build_six_manifold, diagonal_cubic


def test_odd_square_bracket_is_twice_the_word():
    x = LieElement({(0,): 1}, 1)
    assert bracket(x, x).terms == {(0, 0): Fraction(2)}
    y = LieElement({(1,): 1}, 2)
    assert bracket(y, y).is_zero()
    assert is_lie_element(bracket(x, y), [1, 2])
    assert not is_lie_element(LieElement({(0, 1): 1}, 3), [1, 2])


def test_quadratic_model_of_p2(p2):
    model = quadratic_model_from_ring(p2, truncation=5)
    assert model.generators.entries() == [("w", 1), ("w^2", 3)]
    assert model.boundary_of(1).terms == {(0, 0): Fraction(1)}
    assert model.is_quadratic() and model.is_minimal()
    assert model.check_d_squared() == []


def test_lie_homology_matches_homotopy_ranks(p2, p1xp2):
    model = quadratic_model_from_ring(p2, truncation=5)
    pi = homotopy_ranks(p2, 5).ranks
    assert lie_homology(model, range(1, 5)) == {j: pi[j + 1] for j in range(1, 5)}
    assert lie_homology(quadratic_model_from_ring(p1xp2), [1, 2]) == {1: 2, 2: 1}


def test_quintic_model_low_homology():
    model = quadratic_model_from_ring(ci_to_ring(hypersurface(3, 5)))
    assert model.truncation == 5
    assert lie_homology(model, [1, 2]) == {1: 1, 2: 204}


def test_truncation_is_enforced(p2):
    model = quadratic_model_from_ring(p2)
    assert model.truncation == p2.real_dimension - 1 == 3
    with pytest.raises(TruncationError):
        lie_homology(model, [4])
    assert lie_homology(model.with_truncation(5), [4]) == {4: 1}


def test_degree_one_classes_have_no_quadratic_model():
    with pytest.raises(UnsupportedRingError):
        quadratic_model_from_ring(build_exterior_algebra([1, 3]))


def test_sixfold_model_differential():
    model = sixfold_model(2, 2, diagonal_cubic(2))
    names = [entry["name"] for entry in dump_model(model)["generators"]]
    assert names == ["e1", "e2", "z1", "z-1", "f1", "f2", "w"]
    expressions = {entry["name"]: entry["d"] for entry in dump_model(model)["generators"]}
    assert expressions["f1"] == "1/2*[e1,e1]"
    assert expressions["w"] == "[e1,f1] + [e2,f2] - [z1,z-1]"
    assert expressions["e1"] == "0"
    assert model.check_d_squared() == []


def test_sixfold_model_agrees_with_the_ring():
    model = sixfold_model(2, 2, diagonal_cubic(2))
    ring = build_six_manifold(2, 2, diagonal_cubic(2))
    pi = homotopy_ranks(ring, 3).ranks
    assert lie_homology(model, [1, 2]) == {1: pi[2], 2: pi[3]}
    assert pi[3] == 3


def test_sixfold_model_rejects_degenerate_cubic():
    with pytest.raises(DegenerateCubicError) as info:
        sixfold_model(2, 0, {(1, 1, 1): 1})
    assert info.value.witness == ["0", "1"]
    with pytest.raises(UnsupportedRingError):
        sixfold_model(1, 3, diagonal_cubic(1))


def test_lie_homology_matches_homotopy_ranks_across_the_corpus():
    """Lie homology of every simply connected builtin agrees with the Adams homotopy ranks."""
    corpus = RingCorpus()
    checked = []
    for ring in corpus.rings():
        if not ring.simply_connected:
            with pytest.raises(UnsupportedRingError):
                quadratic_model_from_ring(ring)
            continue
        top = ring.real_dimension
        while top > 2 and estimate_e1_size(ring, 2 * (top - 1)) > 5000:
            top -= 1
        model = quadratic_model_from_ring(ring, truncation=top)
        pi = homotopy_ranks(ring, top).ranks
        assert lie_homology(model, range(1, top)) == {j: pi[j + 1] for j in range(1, top)}, ring.name
        checked.append(ring.name)
    assert {"P3", "S3xS3", "quintic", "cubic-threefold", "sixfold"} <= set(checked)


LIE_DEGREES = [1, 1, 2, 3]


def random_homogeneous(rng, degree):
    words = [word for n in range(1, degree + 1)
             for word in product(range(len(LIE_DEGREES)), repeat=n)
             if sum(LIE_DEGREES[x] for x in word) == degree]
    element = LieElement.zero(degree)
    for word in rng.sample(words, min(3, len(words))):
        element = element + left_normed(word, LIE_DEGREES) * rng.randint(-4, 4)
    return element


@pytest.mark.parametrize("seed", range(20))
def test_bracket_is_graded_antisymmetric_and_satisfies_jacobi(seed):
    rng = random.Random(seed)
    x, y, z = (random_homogeneous(rng, rng.randint(1, 3)) for _ in range(3))
    p, q, r = x.degree, y.degree, z.degree

    def sign(n):
        return -1 if n % 2 else 1

    assert bracket(x, y) == bracket(y, x) * -sign(p * q)
    jacobi = (bracket(x, bracket(y, z)) * sign(p * r) + bracket(y, bracket(z, x)) * sign(q * p)
              + bracket(z, bracket(x, y)) * sign(r * q))
    assert jacobi.is_zero()
    assert is_lie_element(bracket(x, bracket(y, z)), LIE_DEGREES)
