import random
from fractions import Fraction

import pytest

from core.char_class import ci_to_ring, hypersurface
from core.derivations import (
    Automorphism, Derivation, SixfoldCoefficients, check_chain_derivation, derivation_cohomology_deg0,
    exp_derivation, johnson_invariant, johnson_surjectivity_witness, johnson_target, johnson_target_dim,
    pi4_johnson_target_dim, sixfold_derivation,
)
from core.exact_linear import column_rank
from core.errors import DerivationError, FiltrationError, TorelliError, UnsupportedRingError
from core.lie_model import LieElement, bracket, quadratic_model_from_ring, sixfold_model
from core.ring_builders import build_six_manifold, diagonal_cubic


@pytest.fixture
def model():
    return sixfold_model(2, 2, diagonal_cubic(2))


def random_coefficients(rng, b2, b3):
    m = b3 // 2
    table = {}
    for k in [k for k in range(1, m + 1)] + [-k for k in range(1, m + 1)]:
        for s in range(1, b2 + 1):
            for t in range(1, b2 + 1):
                if rng.random() < 0.5:
                    table[(k, s, t)] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return SixfoldCoefficients(b2, b3, table)


def test_zero_table_gives_zero_derivation(model):
    D = sixfold_derivation(model, SixfoldCoefficients(2, 2))
    assert D.is_zero()
    assert exp_derivation(model, D) == Automorphism.identity(model)


def test_single_coefficient_derivation(model):
    D = sixfold_derivation(model, SixfoldCoefficients(2, 2, {(1, 1, 2): 1}))
    e1, e2 = model.generator("e1"), model.generator("e2")
    z_minus = model.generator("z-1")
    assert D.value("z1") == bracket(e1, e2)
    assert D.value("f1") == bracket(e2, z_minus)
    assert D.value("f2") == bracket(e1, z_minus)
    assert D.value("w").is_zero()
    assert check_chain_derivation(model, D) == []


def test_forced_b_table():
    coefficients = SixfoldCoefficients(2, 2, {(1, 1, 2): 1})
    assert coefficients.b() == {(1, 2, -1): Fraction(1), (2, 1, -1): Fraction(1)}
    with pytest.raises(DerivationError):
        SixfoldCoefficients(2, 2, {(2, 1, 1): 1})


def test_other_b_tables_break_the_chain_condition_on_w(model):
    coefficients = SixfoldCoefficients(2, 2, {(1, 1, 2): 1})
    D = sixfold_derivation(model, coefficients, b_override={(1, 2, -1): 0, (2, 1, -1): 0})
    assert [name for name, _ in check_chain_derivation(model, D)] == ["w"]


@pytest.mark.parametrize("seed", range(6))
def test_changing_one_forced_b_entry_breaks_w(seed):
    """Every single-entry change of the forced b table leaves a defect on w and nowhere else."""
    rng = random.Random(1000 + seed)
    b2, b3 = rng.choice([2, 3]), rng.choice([2, 4])
    model = sixfold_model(b2, b3, diagonal_cubic(b2))
    table = dict(random_coefficients(rng, b2, b3).a)
    table[(1, 1, 1)] = Fraction(1)
    coefficients = SixfoldCoefficients(b2, b3, table)
    forced = coefficients.b()
    assert (1, 1, -1) in forced
    assert check_chain_derivation(model, sixfold_derivation(model, coefficients)) == []
    for key, value in forced.items():
        D = sixfold_derivation(model, coefficients, b_override={key: value + 1})
        assert [name for name, _ in check_chain_derivation(model, D)] == ["w"], key


@pytest.mark.parametrize("seed", range(120))
def test_random_tables_give_chain_derivations(seed):
    rng = random.Random(seed)
    b2, b3 = rng.randint(1, 4), rng.choice([0, 2, 4])
    model = sixfold_model(b2, b3, diagonal_cubic(b2))
    coefficients = random_coefficients(rng, b2, b3)
    D = sixfold_derivation(model, coefficients)
    assert check_chain_derivation(model, D) == []
    if seed % 10 == 0:
        assert exp_derivation(model, D).commutes_with_differential() == []


def test_differential_is_a_chain_derivation(model):
    assert check_chain_derivation(model, Derivation.differential(model)) == []


def test_exponential_of_single_coefficient(model):
    D = sixfold_derivation(model, SixfoldCoefficients(2, 2, {(1, 1, 2): 1}))
    phi = exp_derivation(model, D)
    assert phi.image("z1") == model.generator("z1") + bracket(model.generator("e1"), model.generator("e2"))
    assert phi.image("e1") == model.generator("e1")
    assert phi.commutes_with_differential() == []
    assert phi.compose(Automorphism.identity(model)) == phi


@pytest.mark.parametrize("seed", range(8))
def test_exponentials_of_commuting_derivations_compose(seed):
    """Single coefficients on positive k commute, so exp D1 ∘ exp D2 = exp(D1 + D2)."""
    rng = random.Random(seed)
    b2, b3 = 3, rng.choice([2, 4])
    model = sixfold_model(b2, b3, diagonal_cubic(b2))

    def single():
        key = (rng.randint(1, b3 // 2), rng.randint(1, b2), rng.randint(1, b2))
        value = Fraction(rng.randint(1, 5), rng.randint(1, 3))
        return sixfold_derivation(model, SixfoldCoefficients(b2, b3, {key: value}))

    D1, D2 = single(), single()
    composed = exp_derivation(model, D1).compose(exp_derivation(model, D2))
    assert composed == exp_derivation(model, D1 + D2)
    assert composed.commutes_with_differential() == []


def test_length_one_values_are_refused(model):
    D = Derivation(model, 0, {"e1": model.generator("e2")})
    with pytest.raises(FiltrationError):
        exp_derivation(model, D)
    with pytest.raises(TorelliError):
        johnson_invariant(model, D)
    with pytest.raises(DerivationError):
        Derivation(model, 0, {"e1": model.generator("z1")})


def test_johnson_invariant_of_single_coefficient(model):
    target = johnson_target(model)
    assert target.dimension == 1
    assert target.basis == [(1, 2)]
    D = sixfold_derivation(model, SixfoldCoefficients(2, 2, {(1, 1, 2): 1}))
    invariant = johnson_invariant(model, D)
    assert invariant.column("z1") == [Fraction(1)]
    assert invariant.column("z-1") == [Fraction(0)]
    assert johnson_invariant(model, exp_derivation(model, D)).matrix == invariant.matrix
    assert invariant.records() == [{"monomial": "e1e2", "z1": "1", "z-1": "0"}]


def test_johnson_target_vanishes_for_b2_one():
    model = sixfold_model(1, 2, diagonal_cubic(1))
    assert johnson_target(model).dimension == 0
    D = sixfold_derivation(model, SixfoldCoefficients(1, 2, {(1, 1, 1): 3}))
    assert johnson_invariant(model, D).is_zero()


def test_johnson_target_dimensions(p1xp2, p2):
    assert johnson_target_dim(ci_to_ring(hypersurface(3, 5))) == (0, 0)
    assert johnson_target_dim(build_six_manifold(2, 2, diagonal_cubic(2))) == (2, 2)
    assert johnson_target_dim(p1xp2) == (0, 0)
    assert pi4_johnson_target_dim(ci_to_ring(hypersurface(3, 5))) == 0
    with pytest.raises(UnsupportedRingError):
        johnson_target_dim(p2)


def test_surjectivity_witness(model):
    witness = johnson_surjectivity_witness(model)
    assert [(entry.z_name, entry.monomial) for entry in witness] == [("z1", (1, 2)), ("z-1", (1, 2))]
    for entry in witness:
        assert entry.automorphism.commutes_with_differential() == []
        assert entry.invariant.column(entry.z_name) == [Fraction(1)]


def test_derivation_cohomology_of_projective_spaces(p2, p3):
    for ring in (p2, p3):
        model = quadratic_model_from_ring(ring, truncation=ring.real_dimension)
        assert derivation_cohomology_deg0(model).dimension == 1
        assert derivation_cohomology_deg0(model, restrict_to_torelli=True).dimension == 0


def invariant_vector(invariant):
    return {(r, c): x for r, row in enumerate(invariant.matrix) for c, x in enumerate(row) if x}


@pytest.mark.parametrize("b2, b3", [(2, 2), (2, 4), (3, 2), (3, 4)])
def test_surjectivity_witness_spans_the_target(b2, b3):
    model = sixfold_model(b2, b3, diagonal_cubic(b2))
    expected = (b2 - 1) * b2 * b3 // 2
    target = johnson_target(model)
    assert b3 * target.dimension == expected
    assert johnson_target_dim(build_six_manifold(b2, b3, diagonal_cubic(b2))) == (expected, expected)
    witness = johnson_surjectivity_witness(model)
    assert len(witness) == expected
    for entry in witness:
        assert entry.automorphism.commutes_with_differential() == []
        unit = [Fraction(int(m == entry.monomial)) for m in target.basis]
        assert entry.invariant.column(entry.z_name) == unit
    assert column_rank(invariant_vector(entry.invariant) for entry in witness) == expected


@pytest.mark.parametrize("b2, b3", [(2, 2), (2, 4), (3, 2)])
def test_johnson_map_on_torelli_cohomology_is_onto(b2, b3):
    """The computed Torelli basis already maps onto Hom(H3, Sym²H2/imΔ)."""
    model = sixfold_model(b2, b3, diagonal_cubic(b2))
    result = derivation_cohomology_deg0(model, restrict_to_torelli=True)
    assert all(check_chain_derivation(model, D) == [] for D in result.basis)
    invariants = [invariant_vector(johnson_invariant(model, D)) for D in result.basis]
    assert column_rank(invariants) == (b2 - 1) * b2 * b3 // 2


def test_derivation_arithmetic(model):
    D = Derivation(model, 0, {"z1": bracket(model.generator("e1"), model.generator("e2"))})
    assert (D + D) == D * 2
    assert (D * 0).is_zero()
    assert D.apply(LieElement({(model.index("z1"),): 1}, 2)) == D.value("z1")
