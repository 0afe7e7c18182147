"""
Free graded DG-Lie models with quadratic differential.

Lie elements live inside the tensor algebra on the generators: a word is a
tuple of generator indices and brackets expand to graded commutators
[u, v] = uv - (-1)^{|u||v|} vu. Generator degrees are homology degrees
lowered by one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from core.cohomology_ring import CohomologyRing, reduced_coproduct
from core.errors import DegenerateCubicError, InternalConsistencyError, TruncationError, UnsupportedRingError
from core.exact_linear import ONE, ZERO, EchelonBasis, GradedBasis, add_scaled, column_rank, fstr
from core.ring_builders import CubicForm, cubic_kernel, symmetric_cubic
from utils.logger import logger

Word = Tuple[int, ...]


class LieElement:
    """A homogeneous element of the tensor algebra, kept as {word: coefficient}."""

    __slots__ = ("terms", "degree")

    def __init__(self, terms: Optional[Mapping[Word, object]] = None, degree: Optional[int] = None):
        self.terms: Dict[Word, Fraction] = {w: Fraction(c) for w, c in (terms or {}).items() if c}
        self.degree = degree

    @classmethod
    def zero(cls, degree: Optional[int] = None) -> "LieElement":
        return cls({}, degree)

    def __repr__(self) -> str:
        return f"LieElement({self.terms!r}, degree={self.degree})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, LieElement):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _combine(self, other: "LieElement", factor: Fraction) -> "LieElement":
        out = dict(self.terms)
        add_scaled(out, factor, other.terms)
        return LieElement(out, self.degree if self.degree is not None else other.degree)

    def __add__(self, other: "LieElement") -> "LieElement":
        return self._combine(other, ONE)

    def __sub__(self, other: "LieElement") -> "LieElement":
        return self._combine(other, -ONE)

    def __neg__(self) -> "LieElement":
        return LieElement({w: -c for w, c in self.terms.items()}, self.degree)

    def __mul__(self, scalar) -> "LieElement":
        scalar = Fraction(scalar)
        return LieElement({w: c * scalar for w, c in self.terms.items()}, self.degree)

    __rmul__ = __mul__

    def lengths(self) -> List[int]:
        return sorted({len(w) for w in self.terms})

    def part(self, length: int) -> "LieElement":
        return LieElement({w: c for w, c in self.terms.items() if len(w) == length}, self.degree)

    def min_length(self) -> Optional[int]:
        return min((len(w) for w in self.terms), default=None)


def tensor_product(u: Mapping[Word, Fraction], v: Mapping[Word, Fraction]) -> Dict[Word, Fraction]:
    out: Dict[Word, Fraction] = {}
    for a, x in u.items():
        for b, y in v.items():
            add_scaled(out, x * y, {a + b: ONE})
    return out


def bracket(u: LieElement, v: LieElement) -> LieElement:
    if u.is_zero() or v.is_zero():
        degree = u.degree + v.degree if u.degree is not None and v.degree is not None else None
        return LieElement.zero(degree)
    sign = -ONE if (u.degree * v.degree) % 2 else ONE
    out = tensor_product(u.terms, v.terms)
    add_scaled(out, -sign, tensor_product(v.terms, u.terms))
    return LieElement(out, u.degree + v.degree)


def left_normed(word: Word, degrees: Sequence[int]) -> LieElement:
    """[[...[x1, x2], ...], xn] for a nonempty word."""
    result = LieElement({word[:1]: ONE}, degrees[word[0]])
    for x in word[1:]:
        result = bracket(result, LieElement({(x,): ONE}, degrees[x]))
    return result


def dynkin_defect(element: LieElement, degrees: Sequence[int]) -> Dict[Word, Fraction]:
    """θ(P) - nP summed over lengths n; zero exactly when P lies in the free Lie algebra."""
    out: Dict[Word, Fraction] = {}
    for word, c in element.terms.items():
        add_scaled(out, c, left_normed(word, degrees).terms)
        add_scaled(out, -c * len(word), {word: ONE})
    return out


def is_lie_element(element: LieElement, degrees: Sequence[int]) -> bool:
    return not dynkin_defect(element, degrees)


def derive(element: LieElement, values: Mapping[int, LieElement], degree: int,
           degrees: Sequence[int]) -> LieElement:
    """Extend generator values to a derivation of the given degree with Koszul signs."""
    out: Dict[Word, Fraction] = {}
    for word, c in element.terms.items():
        shift = 0
        for i, x in enumerate(word):
            value = values.get(x)
            if value is not None and value.terms:
                sign = -ONE if (degree * shift) % 2 else ONE
                head, tail = word[:i], word[i + 1:]
                for w, v in value.terms.items():
                    add_scaled(out, sign * c * v, {head + w + tail: ONE})
            shift += degrees[x]
    new_degree = element.degree + degree if element.degree is not None else None
    return LieElement(out, new_degree)


@dataclass
class SixfoldData:
    b2: int
    b3: int
    cubic: CubicForm

    @property
    def half_b3(self) -> int:
        return self.b3 // 2

    def z_indices(self) -> List[int]:
        """Signed labels of the degree-2 generators in model order: 1..m, -1..-m."""
        m = self.half_b3
        return list(range(1, m + 1)) + [-k for k in range(1, m + 1)]


class DGLieModel:
    """
    Free graded Lie algebra on named generators with a quadratic differential.

    Args:
        generators: names and Lie degrees.
        differential: generator index -> LieElement of degree one less.
        truncation: largest Lie degree the model is asked to compute in.
    """

    def __init__(self, generators: GradedBasis, differential: Mapping[int, LieElement],
                 truncation: int, name: str = "model", sixfold: Optional[SixfoldData] = None):
        self.generators = generators
        self.degrees: Tuple[int, ...] = generators.degrees
        if any(d < 1 for d in self.degrees):
            raise UnsupportedRingError("Lie generators must have positive degree")
        self.differential: Dict[int, LieElement] = {i: v for i, v in differential.items() if v.terms}
        self.truncation = truncation
        self.name = name
        self.sixfold = sixfold
        self._lie_bases: Dict[Tuple[int, int], "LieBasis"] = {}

    def __repr__(self) -> str:
        return f"DGLieModel({self.name!r}, generators={len(self.generators)}, truncation={self.truncation})"

    def __len__(self) -> int:
        return len(self.generators)

    def index(self, name: str) -> int:
        return self.generators.index(name)

    def generator(self, ref) -> LieElement:
        i = ref if isinstance(ref, int) else self.index(ref)
        return LieElement({(i,): ONE}, self.degrees[i])

    def bracket(self, u: LieElement, v: LieElement) -> LieElement:
        return bracket(u, v)

    def boundary_of(self, i: int) -> LieElement:
        return self.differential.get(i, LieElement.zero(self.degrees[i] - 1))

    def apply_differential(self, element: LieElement) -> LieElement:
        return derive(element, self.differential, -1, self.degrees)

    def with_truncation(self, truncation: int) -> "DGLieModel":
        return DGLieModel(self.generators, self.differential, truncation, self.name, self.sixfold)

    def check_d_squared(self) -> List[str]:
        return [self.generators.name(i) for i in range(len(self))
                if self.apply_differential(self.boundary_of(i)).terms]

    def is_minimal(self) -> bool:
        return all(v.min_length() >= 2 for v in self.differential.values())

    def is_quadratic(self) -> bool:
        return all(v.lengths() == [2] for v in self.differential.values())

    def verify(self) -> None:
        bad = [self.generators.name(i) for i, v in self.differential.items() if not is_lie_element(v, self.degrees)]
        if bad:
            raise InternalConsistencyError(f"differential of {bad} is not a Lie element")
        failures = self.check_d_squared()
        if failures:
            raise InternalConsistencyError(f"∂∘∂ != 0 on {failures}")

    # -- graded pieces -----------------------------------------------------------

    def words(self, degree: int) -> List[Word]:
        """All words of total Lie degree ``degree``, in deterministic order."""
        table: Dict[int, List[Word]] = {0: [()]}
        for d in range(1, degree + 1):
            table[d] = [prefix + (x,) for x in range(len(self)) if self.degrees[x] <= d
                        for prefix in table[d - self.degrees[x]]]
        return sorted(table[degree], key=lambda w: (len(w), w))

    def lie_basis(self, degree: int, min_length: int = 1) -> "LieBasis":
        key = (degree, min_length)
        if key not in self._lie_bases:
            self._lie_bases[key] = LieBasis.build(self, degree, min_length)
        return self._lie_bases[key]


@dataclass
class LieBasis:
    """Echelon-reduced left-normed brackets spanning one degree of the free Lie algebra."""
    degree: int
    words: List[Word] = field(default_factory=list)
    elements: List[LieElement] = field(default_factory=list)
    echelon: EchelonBasis = field(default_factory=EchelonBasis)

    @classmethod
    def build(cls, model: DGLieModel, degree: int, min_length: int = 1) -> "LieBasis":
        basis = cls(degree)
        candidates = [w for w in model.words(degree) if len(w) >= min_length]
        logger.increment_metric("lie_basis_words", len(candidates))
        for word in candidates:
            element = left_normed(word, model.degrees)
            if element.terms and basis.echelon.add(element.terms, label=len(basis.words)):
                basis.words.append(word)
                basis.elements.append(element)
        return basis

    def __len__(self) -> int:
        return len(self.words)

    def coordinates(self, element: LieElement) -> Optional[Dict[int, Fraction]]:
        return self.echelon.express(element.terms)


def lie_homology(model: DGLieModel, degrees: Iterable[int]) -> Dict[int, int]:
    """dim H_j(L, ∂) for each requested j, computed degreewise in the tensor algebra."""
    degrees = sorted(set(degrees))
    if degrees and degrees[-1] + 1 > model.truncation:
        raise TruncationError(
            f"H_{degrees[-1]} needs Lie degree {degrees[-1] + 1} but the model is truncated at {model.truncation}")

    ranks: Dict[int, int] = {}

    def boundary_rank(d: int) -> int:
        if d not in ranks:
            basis = model.lie_basis(d) if d >= 1 else None
            ranks[d] = column_rank(model.apply_differential(e).terms for e in basis.elements) if basis else 0
        return ranks[d]

    result = {}
    for j in degrees:
        if j < 1:
            result[j] = 0
            continue
        result[j] = len(model.lie_basis(j)) - boundary_rank(j) - boundary_rank(j + 1)
    return result


# --- constructions ---------------------------------------------------------------

def quadratic_model_from_ring(ring: CohomologyRing, truncation: Optional[int] = None) -> DGLieModel:
    """
    One generator per reduced class, degree lowered by one, with ∂x equal to
    the tensor (J⊗1)Δx where J(u) = (-1)^{|u|} u in homology degree.

    The default truncation is real_dimension - 1, the Lie degree of the
    fundamental class generator.
    """
    ring.require_valid()
    coalgebra = reduced_coproduct(ring)
    classes = coalgebra.classes
    low = [ring.basis.name(x) for x in classes if ring.basis.degree(x) < 2]
    if low:
        raise UnsupportedRingError(f"quadratic models need simply connected rings; degree-1 classes {low}")
    position = {x: i for i, x in enumerate(classes)}
    generators = GradedBasis((ring.basis.name(x), ring.basis.degree(x) - 1) for x in classes)
    differential = {}
    for x in classes:
        terms: Dict[Word, Fraction] = {}
        for (a, b), c in coalgebra.delta(x).items():
            sign = -ONE if ring.basis.degree(a) % 2 else ONE
            add_scaled(terms, sign * c, {(position[a], position[b]): ONE})
        if terms:
            differential[position[x]] = LieElement(terms, ring.basis.degree(x) - 2)
    model = DGLieModel(generators, differential, truncation or ring.real_dimension - 1, name=ring.name)
    model.verify()
    return model


def sixfold_generator_names(b2: int, b3: int) -> List[Tuple[str, int]]:
    m = b3 // 2
    return ([(f"e{i}", 1) for i in range(1, b2 + 1)]
            + [(f"z{k}", 2) for k in range(1, m + 1)] + [(f"z-{k}", 2) for k in range(1, m + 1)]
            + [(f"f{i}", 3) for i in range(1, b2 + 1)] + [("w", 5)])


def sixfold_model(b2: int, b3: int, cubic: Mapping[Tuple[int, int, int], object],
                  truncation: int = 6) -> DGLieModel:
    """
    The model of a formal six-manifold: ∂f_m = Σ (c(i,j,m)/2)[e_i, e_j] and
    ∂w = Σ_j [e_j, f_j] - Σ_{k>0} [z_k, z_{-k}]. Cubic indices are 1-based.
    """
    if b2 < 1 or b3 < 0 or b3 % 2:
        raise UnsupportedRingError(f"six-manifold model needs b2 >= 1 and even b3 >= 0, got b2={b2}, b3={b3}")
    cubic = symmetric_cubic(cubic, b2)
    kernel = cubic_kernel(cubic, b2)
    if kernel:
        raise DegenerateCubicError([fstr(x) for x in kernel[0]])
    generators = GradedBasis(sixfold_generator_names(b2, b3))
    model = DGLieModel(generators, {}, truncation, name=f"sixfold(b2={b2},b3={b3})",
                       sixfold=SixfoldData(b2, b3, cubic))
    e = [model.generator(f"e{i}") for i in range(1, b2 + 1)]
    f = [model.generator(f"f{i}") for i in range(1, b2 + 1)]
    differential = {}
    for m in range(1, b2 + 1):
        value = LieElement.zero(2)
        for i in range(1, b2 + 1):
            for j in range(1, b2 + 1):
                c = cubic.get((i, j, m), ZERO)
                if c:
                    value = value + bracket(e[i - 1], e[j - 1]) * (c / 2)
        differential[model.index(f"f{m}")] = value
    top = LieElement.zero(4)
    for j in range(b2):
        top = top + bracket(e[j], f[j])
    for k in range(1, b3 // 2 + 1):
        top = top - bracket(model.generator(f"z{k}"), model.generator(f"z-{k}"))
    differential[model.index("w")] = top
    model.differential = {i: v for i, v in differential.items() if v.terms}
    model.verify()
    return model


# --- dump ------------------------------------------------------------------------------

def bracket_terms(element: LieElement, model: DGLieModel) -> List[Tuple[Fraction, Word]]:
    """Write a Lie element as Σ c·[left-normed word] using θ(P) = nP on each length."""
    degrees = model.degrees
    collected: Dict[Word, Fraction] = {}
    for word, c in element.terms.items():
        coeff = c / len(word)
        if len(word) == 2 and word[0] > word[1]:
            # [y, x] = -(-1)^{|x||y|} [x, y]
            sign = ONE if (degrees[word[0]] * degrees[word[1]]) % 2 else -ONE
            word, coeff = (word[1], word[0]), coeff * sign
        add_scaled(collected, coeff, {word: ONE})
    return sorted(((c, w) for w, c in collected.items()), key=lambda t: (len(t[1]), t[1]))


def bracket_expression(element: LieElement, model: DGLieModel) -> str:
    if element.is_zero():
        return "0"
    names = model.generators.names

    def nest(word):
        text = names[word[0]]
        for x in word[1:]:
            text = f"[{text},{names[x]}]"
        return text

    parts = []
    for c, word in bracket_terms(element, model):
        prefix = "" if c == 1 else ("-" if c == -1 else f"{fstr(c)}*")
        parts.append(prefix + nest(word))
    return " + ".join(parts).replace("+ -", "- ")


def dump_model(model: DGLieModel) -> Dict[str, object]:
    return {
        "name": model.name,
        "truncation": model.truncation,
        "generators": [
            {"name": name, "degree": degree, "d": bracket_expression(model.boundary_of(i), model)}
            for i, (name, degree) in enumerate(model.generators)
        ],
    }
