"""
Derivations of DG-Lie models: the six-manifold derivation lemma, the chain
condition, exponentials, Johnson invariants and degree-0 derivation cohomology.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Tuple, Union

from core.adams_loop import pi4_kernel_dim
from core.cohomology_ring import CohomologyRing, coalgebra_primitives, reduced_coproduct
from core.errors import (
    DerivationError, FiltrationError, TorelliError, TruncationError, UnsupportedRingError,
)
from core.exact_linear import ONE, ZERO, EchelonBasis, QuotientSpace, column_rank, kernel_combinations, to_scalar
from core.lie_model import DGLieModel, LieElement, bracket, derive
from utils.logger import logger


class Derivation:
    """A graded derivation of ``model`` given by its values on generators."""

    def __init__(self, model: DGLieModel, degree: int, values: Mapping[Union[int, str], LieElement]):
        self.model = model
        self.degree = degree
        self.values: Dict[int, LieElement] = {}
        for ref, value in values.items():
            i = ref if isinstance(ref, int) else model.index(ref)
            expected = model.degrees[i] + degree
            if value.terms and value.degree is not None and value.degree != expected:
                raise DerivationError(
                    f"value on {model.generators.name(i)} has degree {value.degree}, expected {expected}")
            if value.terms:
                self.values[i] = LieElement(value.terms, expected)

    @classmethod
    def differential(cls, model: DGLieModel) -> "Derivation":
        return cls(model, -1, model.differential)

    def __repr__(self) -> str:
        return f"Derivation(degree={self.degree}, nonzero_on={len(self.values)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.degree == other.degree and self.values == other.values

    __hash__ = None

    def __add__(self, other: "Derivation") -> "Derivation":
        values = dict(self.values)
        for i, v in other.values.items():
            values[i] = values[i] + v if i in values else v
        return Derivation(self.model, self.degree, values)

    def __mul__(self, scalar) -> "Derivation":
        return Derivation(self.model, self.degree, {i: v * scalar for i, v in self.values.items()})

    __rmul__ = __mul__

    def value(self, ref) -> LieElement:
        i = ref if isinstance(ref, int) else self.model.index(ref)
        return self.values.get(i, LieElement.zero(self.model.degrees[i] + self.degree))

    def apply(self, element: LieElement) -> LieElement:
        return derive(element, self.values, self.degree, self.model.degrees)

    def is_zero(self) -> bool:
        return not self.values


def commutator_with_differential(D: Derivation, generator: int) -> LieElement:
    """[D, ∂] = D∂ - (-1)^{-d} ∂D evaluated on one generator."""
    model = D.model
    first = D.apply(model.boundary_of(generator))
    second = model.apply_differential(D.value(generator))
    return first - second if D.degree % 2 == 0 else first + second


def check_chain_derivation(model: DGLieModel, D: Derivation) -> List[Tuple[str, LieElement]]:
    """Generators where [D, ∂] does not vanish, with the offending values."""
    if D.model is not model and D.model.generators != model.generators:
        raise DerivationError("derivation belongs to a different model")
    failures = []
    for i in range(len(model)):
        value = commutator_with_differential(D, i)
        if value.terms:
            failures.append((model.generators.name(i), value))
    return failures


# --- the six-manifold derivation lemma ---------------------------------------------------

@dataclass
class SixfoldCoefficients:
    """
    a_k^{s,t} for k in ±1..±m and s, t in 1..b2, and the forced
    b_j^{i,k} = -sgn(k)(a^{i,j}_{-k} + a^{j,i}_{-k}).
    """
    b2: int
    b3: int
    a: Dict[Tuple[int, int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        m = self.b3 // 2
        clean = {}
        for (k, s, t), value in self.a.items():
            if not (1 <= abs(k) <= m and 1 <= s <= self.b2 and 1 <= t <= self.b2):
                raise DerivationError(f"coefficient index (k={k}, s={s}, t={t}) out of range")
            value = to_scalar(value)
            if value:
                clean[(k, s, t)] = value
        self.a = clean

    def coefficient(self, k: int, s: int, t: int) -> Fraction:
        return self.a.get((k, s, t), ZERO)

    def b(self) -> Dict[Tuple[int, int, int], Fraction]:
        """Nonzero b keyed (j, i, k): the coefficient of [e_i, z_k] in D f_j."""
        out = {}
        for (k, s, t) in self.a:
            for j, i in ((t, s), (s, t)):
                key = (j, i, -k)
                if key in out:
                    continue
                sign = ONE if -k > 0 else -ONE
                value = -sign * (self.coefficient(k, i, j) + self.coefficient(k, j, i))
                if value:
                    out[key] = value
        return dict(sorted(out.items()))


def sixfold_derivation(model: DGLieModel, coefficients: SixfoldCoefficients,
                       b_override: Optional[Mapping[Tuple[int, int, int], object]] = None) -> Derivation:
    """
    De = 0, Dz_k = Σ a_k^{s,t}[e_s, e_t], Df_j = Σ b_j^{i,k}[e_i, z_k], Dw = 0.

    ``b_override`` replaces the forced b table entry by entry; it exists to
    demonstrate that any other choice breaks the chain condition on w.
    """
    data = model.sixfold
    if data is None:
        raise UnsupportedRingError("sixfold derivations need a six-manifold model")
    if (coefficients.b2, coefficients.b3) != (data.b2, data.b3):
        raise DerivationError("coefficient table does not match the model's Betti numbers")
    e = {i: model.generator(f"e{i}") for i in range(1, data.b2 + 1)}
    z = {k: model.generator(f"z{k}") for k in data.z_indices()}
    values: Dict[int, LieElement] = {}
    for (k, s, t), c in coefficients.a.items():
        i = model.index(f"z{k}")
        values[i] = values.get(i, LieElement.zero(2)) + bracket(e[s], e[t]) * c
    b = coefficients.b()
    for key, value in (b_override or {}).items():
        b[key] = to_scalar(value)
    for (j, i, k), c in b.items():
        if c:
            index = model.index(f"f{j}")
            values[index] = values.get(index, LieElement.zero(3)) + bracket(e[i], z[k]) * c
    return Derivation(model, 0, values)


# --- automorphisms ---------------------------------------------------------------------

class Automorphism:
    """A degree-0 algebra map of the model given on generators."""

    def __init__(self, model: DGLieModel, images: Mapping[int, LieElement]):
        self.model = model
        self.images = {i: images.get(i, model.generator(i)) for i in range(len(model))}

    @classmethod
    def identity(cls, model: DGLieModel) -> "Automorphism":
        return cls(model, {})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.images == other.images

    __hash__ = None

    def image(self, ref) -> LieElement:
        return self.images[ref if isinstance(ref, int) else self.model.index(ref)]

    def apply(self, element: LieElement) -> LieElement:
        out = LieElement.zero(element.degree)
        for word, c in element.terms.items():
            term = LieElement({(): ONE}, 0)
            for x in word:
                image = self.images[x]
                term = LieElement({a + w: u * v for a, u in term.terms.items() for w, v in image.terms.items()},
                                  term.degree + self.model.degrees[x])
            out = out + term * c
        return out

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self ∘ other."""
        return Automorphism(self.model, {i: self.apply(v) for i, v in other.images.items()})

    def commutes_with_differential(self) -> List[str]:
        """Generators where φ∂ != ∂φ."""
        model = self.model
        return [model.generators.name(i) for i in range(len(model))
                if self.apply(model.boundary_of(i)) != model.apply_differential(self.images[i])]


def exp_derivation(model: DGLieModel, D: Derivation) -> Automorphism:
    """exp D = Σ D^k / k! on each generator; D must strictly raise bracket length."""
    if D.degree != 0:
        raise DerivationError(f"exp needs a degree-0 derivation, got degree {D.degree}")
    for i, value in D.values.items():
        if value.min_length() < 2:
            raise FiltrationError(f"D does not raise bracket length on {model.generators.name(i)}")
    images = {}
    for i in range(len(model)):
        term = model.generator(i)
        total = term
        k = 1
        while True:
            term = D.apply(term)
            if term.is_zero():
                break
            total = total + term * Fraction(1, factorial(k))
            k += 1
        images[i] = total
    return Automorphism(model, images)


# --- Johnson invariants ---------------------------------------------------------------------

def _sym2_coordinates(element: LieElement, model: DGLieModel, b2: int) -> Dict[Tuple[int, int], Fraction]:
    """Length-2 part in monomial coordinates: [e_s, e_t] ↦ e_s e_t for s <= t."""
    out: Dict[Tuple[int, int], Fraction] = {}
    e_index = {model.index(f"e{i}"): i for i in range(1, b2 + 1)}
    for word, c in element.part(2).terms.items():
        if word[0] not in e_index or word[1] not in e_index:
            continue
        s, t = e_index[word[0]], e_index[word[1]]
        if s < t:
            out[(s, t)] = out.get((s, t), ZERO) + c
        elif s == t:
            out[(s, s)] = out.get((s, s), ZERO) + c / 2
    return {k: v for k, v in out.items() if v}


def sym2_monomials(b2: int) -> List[Tuple[int, int]]:
    return [(s, t) for s in range(1, b2 + 1) for t in range(s, b2 + 1)]


@dataclass
class JohnsonTarget:
    """Sym²H₂/imΔ with imΔ = span ∂f_m, and a complement of non-pivot monomials."""
    monomials: List[Tuple[int, int]]
    quotient: QuotientSpace

    @property
    def basis(self) -> List[Tuple[int, int]]:
        return [self.monomials[i] for i in self.quotient.complement]

    @property
    def dimension(self) -> int:
        return self.quotient.dimension

    def project(self, coords: Mapping[Tuple[int, int], Fraction]):
        position = {m: i for i, m in enumerate(self.monomials)}
        vector = [ZERO] * len(self.monomials)
        for key, value in coords.items():
            vector[position[key]] = value
        return self.quotient.project(vector)


def johnson_target(model: DGLieModel) -> JohnsonTarget:
    data = model.sixfold
    if data is None:
        raise UnsupportedRingError("Johnson invariants are defined here for six-manifold models")
    monomials = sym2_monomials(data.b2)
    position = {m: i for i, m in enumerate(monomials)}
    image = []
    for m in range(1, data.b2 + 1):
        coords = _sym2_coordinates(model.boundary_of(model.index(f"f{m}")), model, data.b2)
        vector = [ZERO] * len(monomials)
        for key, value in coords.items():
            vector[position[key]] = value
        image.append(vector)
    return JohnsonTarget(monomials, QuotientSpace(len(monomials), image))


@dataclass
class JohnsonInvariant:
    """Matrix of z ↦ [length-2 part of Dz] in Sym²H₂/imΔ; columns follow ``z_names``."""
    z_names: List[str]
    target_basis: List[Tuple[int, int]]
    matrix: List[List[Fraction]]

    def is_zero(self) -> bool:
        return all(not x for row in self.matrix for x in row)

    def column(self, z_name: str) -> List[Fraction]:
        j = self.z_names.index(z_name)
        return [row[j] for row in self.matrix]

    def records(self) -> List[Dict[str, object]]:
        rows = []
        for (s, t), row in zip(self.target_basis, self.matrix):
            record = {"monomial": f"e{s}e{t}"}
            record.update({z: str(x) for z, x in zip(self.z_names, row)})
            rows.append(record)
        return rows


def johnson_invariant(model: DGLieModel, transformation: Union[Derivation, Automorphism]) -> JohnsonInvariant:
    """
    Johnson invariant of a Torelli derivation or automorphism of a six-manifold model.

    Raises:
        TorelliError: the input moves some generator modulo brackets.
    """
    data = model.sixfold
    target = johnson_target(model)
    if isinstance(transformation, Derivation):
        if transformation.degree != 0:
            raise DerivationError("Johnson invariants need a degree-0 derivation")
        shifts = {i: transformation.value(i) for i in range(len(model))}
    else:
        shifts = {i: transformation.image(i) - model.generator(i) for i in range(len(model))}
    moved = [model.generators.name(i) for i, v in shifts.items() if v.part(1).terms]
    if moved:
        raise TorelliError(f"not Torelli: generators {moved} move modulo brackets")
    z_names = [f"z{k}" for k in data.z_indices()]
    columns = []
    for name in z_names:
        coords = _sym2_coordinates(shifts[model.index(name)], model, data.b2)
        columns.append(target.project(coords))
    matrix = [[columns[j][r] for j in range(len(columns))] for r in range(target.dimension)]
    return JohnsonInvariant(z_names, target.basis, matrix)


def _require_six(ring: CohomologyRing) -> None:
    if ring.real_dimension != 6:
        raise UnsupportedRingError(
            f"Johnson targets are stated for real dimension 6, got {ring.real_dimension}")


def johnson_target_dim(ring: CohomologyRing) -> Tuple[int, int]:
    """(dim Hom(H₃, Sym²H₂/imΔ), the lower bound (b₂ - 1)b₂b₃/2)."""
    ring.require_valid()
    _require_six(ring)
    b2, b3 = ring.betti(2), ring.betti(3)
    coalgebra = reduced_coproduct(ring)
    columns = [{pair: c for pair, c in coalgebra.delta(x).items()
                if ring.basis.degree(pair[0]) == 2 and ring.basis.degree(pair[1]) == 2}
               for x in coalgebra.in_degree(4)]
    rank = column_rank(columns)
    return b3 * (b2 * (b2 + 1) // 2 - rank), (b2 - 1) * b2 * b3 // 2


def pi4_johnson_target_dim(ring: CohomologyRing) -> int:
    """dim Hom(PH₄, (H₂⊗H₃)/imΔ) for b₂ = 1."""
    ring.require_valid()
    kernel, _ = pi4_kernel_dim(ring)
    return len(coalgebra_primitives(ring, 4)) * kernel


@dataclass
class WitnessEntry:
    z_name: str
    monomial: Tuple[int, int]
    coefficients: SixfoldCoefficients
    automorphism: Automorphism
    invariant: JohnsonInvariant


def johnson_surjectivity_witness(model: DGLieModel) -> List[WitnessEntry]:
    """One exp D per standard basis vector of Hom(H₃, Sym²H₂/imΔ)."""
    data = model.sixfold
    target = johnson_target(model)
    entries = []
    for k in data.z_indices():
        for s, t in target.basis:
            coefficients = SixfoldCoefficients(data.b2, data.b3, {(k, s, t): ONE})
            D = sixfold_derivation(model, coefficients)
            phi = exp_derivation(model, D)
            entries.append(WitnessEntry(f"z{k}", (s, t), coefficients, phi, johnson_invariant(model, phi)))
    return entries


# --- derivation cohomology ----------------------------------------------------------------------

@dataclass
class DerivationCohomology:
    dimension: int
    cycles: int
    boundaries: int
    truncation: int
    torelli: bool
    basis: List[Derivation] = field(default_factory=list)


def derivation_cohomology_deg0(model: DGLieModel, restrict_to_torelli: bool = False) -> DerivationCohomology:
    """
    Degree-0 chain derivations modulo [∂, h] = ∂h + h∂ for degree +1 derivations h.
    With ``restrict_to_torelli`` only values of bracket length >= 2 are allowed.
    """
    top = max(model.degrees) + 1
    if model.truncation < top:
        raise TruncationError(f"derivation cohomology needs Lie degree {top}, model truncated at {model.truncation}")
    min_length = 2 if restrict_to_torelli else 1
    n = len(model)
    value_bases = [model.lie_basis(model.degrees[i], min_length) for i in range(n)]
    unknowns = [(i, b) for i in range(n) for b in range(len(value_bases[i]))]
    offsets, offset = [], 0
    for i in range(n):
        offsets.append(offset)
        offset += len(value_bases[i])
    logger.increment_metric("derivation_unknowns", len(unknowns))
    logger.log(f"derivation cohomology of {model.name}: {len(unknowns)} unknowns")

    def single(i: int, b: int) -> Derivation:
        return Derivation(model, 0, {i: value_bases[i].elements[b]})

    columns = []
    for i, b in unknowns:
        D = single(i, b)
        column = {}
        for x in range(n):
            for word, c in commutator_with_differential(D, x).terms.items():
                column[(x, word)] = c
        columns.append(column)
    kernel = kernel_combinations(columns)

    boundaries = []
    for y in range(n):
        h_basis = model.lie_basis(model.degrees[y] + 1)
        for element in h_basis.elements:
            h = Derivation(model, 1, {y: element})
            vector = {}
            for x in range(n):
                value = model.apply_differential(h.value(x)) + h.apply(model.boundary_of(x))
                if value.is_zero():
                    continue
                coords = value_bases[x].coordinates(value)
                if coords is None:
                    raise DerivationError(f"[∂, h] leaves the allowed values on {model.generators.name(x)}")
                for b, c in coords.items():
                    vector[offsets[x] + b] = c
            if vector:
                boundaries.append(vector)

    echelon = EchelonBasis()
    for vector in boundaries:
        echelon.add(vector)
    boundary_rank = echelon.rank
    basis = []
    for combo in kernel:
        if echelon.add(combo):
            values: Dict[int, LieElement] = {}
            for u, c in combo.items():
                i, b = unknowns[u]
                values[i] = values.get(i, LieElement.zero(model.degrees[i])) + value_bases[i].elements[b] * c
            basis.append(Derivation(model, 0, values))
    return DerivationCohomology(len(kernel) - boundary_rank, len(kernel), boundary_rank,
                                model.truncation, restrict_to_torelli, basis)
