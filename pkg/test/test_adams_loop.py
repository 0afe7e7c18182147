from fractions import Fraction

import pytest

from core.adams_loop import (
    build_e1, compute_e2, estimate_e1_size, homotopy_from_loop_ranks, homotopy_ranks, loop_homology_ranks,
    PiSequenceReport, milnor_moore_series, pi3_sequence, pi4_sequence_b2_1, reduced_shuffle,
)
from core.char_class import ci_to_ring, hypersurface
from core.corpus import RingCorpus
from core.errors import ResourceLimitError, TruncationError, UnsupportedRingError
from core.ring_builders import (
    build_exterior_algebra, build_projective_space, build_six_manifold, build_sphere, diagonal_cubic,
)


@pytest.fixture
def quintic():
    return ci_to_ring(hypersurface(3, 5))


@pytest.fixture
def sixfold():
    return build_six_manifold(2, 2, diagonal_cubic(2), omega=[1, 1])


def test_letter_differential_of_p2(p2):
    complex_ = build_e1(p2, 4)
    w, w2 = p2.basis.index("w"), p2.basis.index("w^2")
    assert complex_.letter_differential(w2) == {(w, w): Fraction(1)}
    assert complex_.letter_differential(w) == {}
    flipped = build_e1(p2, 4, differential_sign=-1)
    assert flipped.letter_differential(w2) == {(w, w): Fraction(-1)}


def test_sphere_has_zero_differential():
    complex_ = build_e1(build_sphere(3), 9)
    assert all(not complex_.differential_of_word(w) for key in complex_.bidegrees() for w in complex_.basis(*key))
    page = compute_e2(complex_)
    assert [page.dimension(s, 3 * s) for s in range(4)] == [1, 1, 1, 1]


def test_e1_dimensions_of_a_six_manifold(sixfold):
    complex_ = build_e1(sixfold, 6)
    assert complex_.check_d_squared() == []
    assert complex_.dimension(2, 5) == 2 * 2 * 2
    assert complex_.dimension(2, 6) == 2 * 2 + 2 * 2 * 2


def test_quintic_e2_page(quintic):
    page = compute_e2(build_e1(quintic, 4))
    assert page.dimension(1, 2) == 1
    assert page.dimension(1, 3) == 204
    assert page.dimension(2, 4) == 0
    assert len(page.representatives[(1, 3)]) == 204


def test_representatives_can_be_skipped(quintic):
    page = compute_e2(build_e1(quintic, 4), representative_limit=10)
    assert (1, 3) in page.skipped_representatives
    assert page.dimension(1, 3) == 204


@pytest.mark.parametrize("ring, expected", [
    (build_projective_space(1), [1, 1, 1, 1, 1]),
    (build_sphere(3), [1, 0, 1, 0, 1]),
    (build_projective_space(2), [1, 1, 0, 0, 1, 1]),
])
def test_loop_homology_ranks(ring, expected):
    assert loop_homology_ranks(ring, len(expected) - 1) == expected


def test_p2_homotopy_ranks(p2):
    result = homotopy_ranks(p2, 6)
    assert [result.ranks[j] for j in range(2, 7)] == [1, 0, 0, 1, 0]
    assert result.graded[2] == {1: 1}


def test_p3_has_pi7_only_above_pi2(p3):
    result = homotopy_ranks(p3, 7)
    assert result.ranks == {2: 1, 3: 0, 4: 0, 5: 0, 6: 0, 7: 1}


def test_sphere_has_pi3_only():
    result = homotopy_ranks(build_sphere(3), 6)
    assert {j: r for j, r in result.ranks.items() if r} == {3: 1}


def test_product_and_quintic_low_homotopy(p1xp2, quintic):
    assert homotopy_ranks(p1xp2, 3).ranks == {2: 2, 3: 1}
    assert homotopy_ranks(quintic, 3).ranks == {2: 1, 3: 204}


def test_hurewicz_piece_is_b2(p1xp2):
    result = homotopy_ranks(p1xp2, 4)
    assert result.graded[2] == {1: 2}
    for j, total in result.ranks.items():
        assert sum(result.graded[j].values()) == total


def test_differential_sign_does_not_change_ranks(p1xp2):
    plain = compute_e2(build_e1(p1xp2, 6)).dims
    flipped = compute_e2(build_e1(p1xp2, 6, differential_sign=-1)).dims
    assert plain == flipped


def test_milnor_moore_factorization(p2):
    loop = loop_homology_ranks(p2, 5)
    assert homotopy_from_loop_ranks(loop) == {2: 1, 3: 0, 4: 0, 5: 1, 6: 0}
    assert milnor_moore_series({1: 1, 4: 1}, 5) == loop
    pi = homotopy_ranks(p2, 6).ranks
    assert milnor_moore_series({j - 1: r for j, r in pi.items()}, 5) == loop


def test_pi3_sequences(p1xp2, quintic, sixfold):
    homotopy, loop = pi3_sequence(quintic)
    assert (homotopy.kernel, homotopy.middle, homotopy.cokernel) == (0, 204, 204)
    assert (loop.kernel, loop.middle, loop.cokernel) == (0, 204, 204)
    homotopy, loop = pi3_sequence(p1xp2)
    assert (homotopy.kernel, homotopy.middle, homotopy.cokernel) == (1, 1, 0)
    assert loop.middle == loop_homology_ranks(p1xp2, 2)[2]
    homotopy, _ = pi3_sequence(sixfold)
    assert (homotopy.kernel, homotopy.middle, homotopy.cokernel) == (1, 3, 2)
    assert homotopy.record()["sym2_dim"] == 3


@pytest.mark.parametrize("name", ["P1", "P2", "P3", "P1xP1", "P1xP2", "S3-ring", "S3xS3", "cubic-threefold"])
def test_pi3_sequences_are_exact(name):
    """Δ and primitive counts agree with the independently computed middle terms."""
    ring = RingCorpus().build(name)
    for report in pi3_sequence(ring):
        assert report.exact, report.record()
        assert report.record()["exact"] is True


def test_pi4_sequence(p2, p3, p1xp2, quintic):
    report = pi4_sequence_b2_1(quintic)
    assert (report.kernel, report.middle, report.cokernel) == (204, 204, 0)
    assert report.exact
    assert (pi4_sequence_b2_1(p3).kernel, pi4_sequence_b2_1(p3).cokernel) == (0, 0)
    assert pi4_sequence_b2_1(p3).middle == homotopy_ranks(p3, 4).ranks[4] == 0
    assert pi4_sequence_b2_1(p2).middle == 0
    with pytest.raises(UnsupportedRingError):
        pi4_sequence_b2_1(p1xp2)


def test_sequence_report_flags_a_mismatched_middle():
    report = PiSequenceReport("pi3", 1, 3, 1)
    assert not report.exact
    assert report.record()["exact"] is False


def test_size_estimate_and_refusal(p2):
    assert estimate_e1_size(p2, 4) == 4
    with pytest.raises(ResourceLimitError) as info:
        build_e1(p2, 10, max_words=5)
    assert info.value.cap == 5
    with pytest.raises(TruncationError):
        build_e1(p2, 1)


def test_degree_one_classes_are_unsupported():
    with pytest.raises(UnsupportedRingError):
        build_e1(build_exterior_algebra([1, 3]), 4)


def test_reduced_shuffle_of_two_letters():
    # letters of reduced degree 1 anticommute
    assert reduced_shuffle((5, 7), [1, 1]) == {("c", (5,), (7,)): Fraction(1), ("c", (7,), (5,)): Fraction(-1)}
