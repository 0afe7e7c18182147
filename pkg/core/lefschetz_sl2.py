"""
The Lefschetz sl2 attached to a Kahler class, the primitive decomposition,
polarization pairings and the algebra of degree-0 ring derivations fixing a
list of classes.

Operators are stored per degree as numpy object arrays of Fraction; block m
maps H^m to H^{m+shift} in the ring's basis order within each degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from core.cohomology_ring import CohomologyRing
from core.errors import DerivationError, HardLefschetzError, InternalConsistencyError
from core.exact_linear import (
    ONE, ZERO, EchelonBasis, SparseMap, SparseVector, column_rank, dense_rank, invert_dense,
    kernel_combinations, rank_kernel_image,
)
from utils.logger import logger

DEFAULT_MAX_DERIVATION_BASIS = 400


def _zeros(rows: int, cols: int) -> np.ndarray:
    return np.full((rows, cols), Fraction(0), dtype=object)


class GradedOperator:
    """A linear endomorphism of H^• of fixed degree ``shift``."""

    def __init__(self, ring: CohomologyRing, shift: int, blocks: Optional[Mapping[int, np.ndarray]] = None):
        self.ring = ring
        self.shift = shift
        self.blocks: Dict[int, np.ndarray] = {}
        for m in self.degrees():
            block = (blocks or {}).get(m)
            self.blocks[m] = block if block is not None else _zeros(ring.betti(m + shift), ring.betti(m))

    def degrees(self) -> List[int]:
        top = self.ring.real_dimension
        return [m for m in range(top + 1) if self.ring.betti(m) and 0 <= m + self.shift <= top
                and self.ring.betti(m + self.shift)]

    @classmethod
    def from_images(cls, ring: CohomologyRing, shift: int,
                    image: Callable[[int], SparseVector]) -> "GradedOperator":
        """Operator sending basis class i to ``image(i)`` (a vector in H^{deg i + shift})."""
        op = cls(ring, shift)
        for m in op.degrees():
            target = {k: r for r, k in enumerate(ring.basis.in_degree(m + shift))}
            for c, i in enumerate(ring.basis.in_degree(m)):
                for k, v in image(i).items():
                    if k not in target:
                        raise InternalConsistencyError(f"image of {ring.basis.name(i)} leaves degree {m + shift}")
                    op.blocks[m][target[k], c] = v
        return op

    @classmethod
    def scalar_per_degree(cls, ring: CohomologyRing, scalar: Callable[[int], Fraction]) -> "GradedOperator":
        op = cls(ring, 0)
        for m in op.degrees():
            for r in range(ring.betti(m)):
                op.blocks[m][r, r] = Fraction(scalar(m))
        return op

    @classmethod
    def multiplication(cls, ring: CohomologyRing, vector: SparseVector, degree: int) -> "GradedOperator":
        return cls.from_images(ring, degree, lambda i: ring.multiply(vector, ring.class_vector(i)))

    def block(self, m: int) -> np.ndarray:
        if m in self.blocks:
            return self.blocks[m]
        rows = self.ring.betti(m + self.shift) if 0 <= m + self.shift <= self.ring.real_dimension else 0
        return _zeros(rows, self.ring.betti(m) if 0 <= m <= self.ring.real_dimension else 0)

    def compose(self, other: "GradedOperator") -> "GradedOperator":
        """self ∘ other."""
        result = GradedOperator(self.ring, self.shift + other.shift)
        for m in result.degrees():
            result.blocks[m] = self.block(m + other.shift).dot(other.block(m))
        return result

    __matmul__ = compose

    def _combine(self, other: "GradedOperator", factor: Fraction) -> "GradedOperator":
        if self.shift != other.shift:
            raise InternalConsistencyError("adding operators of different degree")
        return GradedOperator(self.ring, self.shift,
                              {m: self.block(m) + other.block(m) * factor for m in self.degrees()})

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        return self._combine(other, ONE)

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return self._combine(other, -ONE)

    def __mul__(self, scalar) -> "GradedOperator":
        scalar = Fraction(scalar)
        return GradedOperator(self.ring, self.shift, {m: b * scalar for m, b in self.blocks.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(not np.any(b != 0) for b in self.blocks.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedOperator):
            return NotImplemented
        return self.shift == other.shift and (self - other).is_zero()

    __hash__ = None

    def apply(self, vector: SparseVector) -> SparseVector:
        out: Dict[int, Fraction] = {}
        for m in self.degrees():
            source = self.ring.basis.in_degree(m)
            column = np.array([vector[i] for i in source], dtype=object)
            if not any(column):
                continue
            image = self.blocks[m].dot(column)
            for r, k in enumerate(self.ring.basis.in_degree(m + self.shift)):
                if image[r]:
                    out[k] = out.get(k, ZERO) + image[r]
        return SparseVector(len(self.ring), out)

    def entries(self) -> Dict[Tuple[int, int, int], Fraction]:
        """Nonzero matrix entries keyed (degree, row, column)."""
        return {(m, r, c): b[r, c] for m, b in sorted(self.blocks.items())
                for r in range(b.shape[0]) for c in range(b.shape[1]) if b[r, c]}

    def trace(self) -> Fraction:
        if self.shift:
            return ZERO
        return sum((sum(b.diagonal(), ZERO) for b in self.blocks.values()), ZERO)


def commutator(a: GradedOperator, b: GradedOperator) -> GradedOperator:
    """ab - ba (all operators here have even degree)."""
    return a.compose(b) - b.compose(a)


def _omega(ring: CohomologyRing, omega: Optional[SparseVector]) -> SparseVector:
    omega = omega if omega is not None else ring.omega
    if omega is None:
        raise HardLefschetzError(f"ring {ring.name!r} has no Kahler class")
    if ring.real_dimension % 2:
        raise HardLefschetzError(f"ring {ring.name!r} has odd real dimension")
    return omega


# --- hard Lefschetz ----------------------------------------------------------------------

def hard_lefschetz_check(ring: CohomologyRing, omega: Optional[SparseVector] = None) -> Dict[int, bool]:
    """For each j >= 0 with H^{n-j} != 0: whether w^j: H^{n-j} -> H^{n+j} is an isomorphism."""
    omega = _omega(ring, omega)
    n = ring.complex_dimension
    verdicts = {}
    for j in range(n + 1):
        source = ring.basis.in_degree(n - j)
        if not source:
            continue
        power = ring.power(omega, j)
        target = {k: r for r, k in enumerate(ring.basis.in_degree(n + j))}
        columns = [{target[k]: v for k, v in ring.multiply(power, ring.class_vector(i)).items()} for i in source]
        verdicts[j] = len(source) == len(target) and column_rank(columns) == len(source)
    return verdicts


@dataclass
class PrimitiveDecomposition:
    """
    Primitive subspaces P^m = ker w^{n-m+1} ∩ H^m for m <= n and the adapted
    bases {w^l p} of every H^m.
    """
    ring: CohomologyRing
    omega: SparseVector
    primitives: Dict[int, List[SparseVector]] = field(default_factory=dict)
    adapted: Dict[int, List[Tuple[int, int, int]]] = field(default_factory=dict)
    change_of_basis: Dict[int, List[List[Fraction]]] = field(default_factory=dict)
    inverse: Dict[int, List[List[Fraction]]] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.ring.complex_dimension

    def dims(self) -> Dict[int, int]:
        return {m: len(p) for m, p in sorted(self.primitives.items())}

    def dimension_identity(self) -> Dict[int, bool]:
        """dim P^m = b_m - b_{m-2} for every m <= n."""
        b = self.ring.betti
        return {m: len(p) == b(m) - (b(m - 2) if m >= 2 else 0) for m, p in self.primitives.items()}

    def components(self, vector: SparseVector, m: int) -> Dict[int, List[Fraction]]:
        """Coordinates of a class in H^m along each w^l P^{m-2l}, keyed by l."""
        local = [vector[i] for i in self.ring.basis.in_degree(m)]
        coords = [sum((row[k] * local[k] for k in range(len(local))), ZERO) for row in self.inverse.get(m, [])]
        out: Dict[int, List[Fraction]] = {}
        for (l, _, _), value in zip(self.adapted.get(m, []), coords):
            out.setdefault(l, []).append(value)
        return out


def _local_to_global(ring: CohomologyRing, m: int, local: SparseVector) -> SparseVector:
    source = ring.basis.in_degree(m)
    return SparseVector(len(ring), {source[i]: v for i, v in local.items()})


def primitive_decomposition(ring: CohomologyRing, omega: Optional[SparseVector] = None) -> PrimitiveDecomposition:
    omega = _omega(ring, omega)
    n = ring.complex_dimension
    decomposition = PrimitiveDecomposition(ring, omega)
    for m in range(n + 1):
        source = ring.basis.in_degree(m)
        if not source:
            decomposition.primitives[m] = []
            continue
        power = ring.power(omega, n - m + 1)
        target = {k: r for r, k in enumerate(ring.basis.in_degree(2 * n - m + 2))}
        columns = [{target[k]: v for k, v in ring.multiply(power, ring.class_vector(i)).items()} for i in source]
        kernel = rank_kernel_image(SparseMap(len(source), len(target), columns)).kernel
        decomposition.primitives[m] = [_local_to_global(ring, m, v) for v in kernel]

    for m in range(2 * n + 1):
        source = ring.basis.in_degree(m)
        if not source:
            continue
        position = {k: r for r, k in enumerate(source)}
        adapted, columns = [], []
        for l in range(m // 2 + 1):
            base = m - 2 * l
            if base > n or l > n - base:
                continue
            power = ring.power(omega, l)
            for k, p in enumerate(decomposition.primitives.get(base, [])):
                image = ring.multiply(power, p)
                adapted.append((l, base, k))
                column = [ZERO] * len(source)
                for i, v in image.items():
                    column[position[i]] = v
                columns.append(column)
        if len(adapted) != len(source):
            raise HardLefschetzError(f"Lefschetz decomposition of H^{m} has {len(adapted)} of {len(source)} classes")
        q = [[columns[c][r] for c in range(len(columns))] for r in range(len(source))]
        decomposition.adapted[m] = adapted
        decomposition.change_of_basis[m] = q
        decomposition.inverse[m] = invert_dense(q)
    return decomposition


@dataclass
class Sl2Action:
    ring: CohomologyRing
    omega: SparseVector
    e: GradedOperator
    h: GradedOperator
    f: GradedOperator
    decomposition: PrimitiveDecomposition

    def relation_defects(self) -> List[str]:
        defects = []
        if commutator(self.h, self.e) != self.e * 2:
            defects.append("[h,e] = 2e")
        if commutator(self.h, self.f) != self.f * -2:
            defects.append("[h,f] = -2f")
        if commutator(self.e, self.f) != self.h:
            defects.append("[e,f] = h")
        return defects


def build_sl2(ring: CohomologyRing, omega: Optional[SparseVector] = None) -> Sl2Action:
    """
    e = multiplication by w, h = (m - n) on H^m, and f(w^l p) = l(j - l + 1) w^{l-1} p
    for p in P^{n-j}. The three relations and ker f = primitives are verified.
    """
    omega = _omega(ring, omega)
    failures = [j for j, ok in hard_lefschetz_check(ring, omega).items() if not ok]
    if failures:
        raise HardLefschetzError(f"hard Lefschetz fails for {ring.name!r} at j = {failures}")
    n = ring.complex_dimension
    decomposition = primitive_decomposition(ring, omega)
    e = GradedOperator.multiplication(ring, omega, 2)
    h = GradedOperator.scalar_per_degree(ring, lambda m: Fraction(m - n))
    f = GradedOperator(ring, -2)
    for m in f.degrees():
        source_basis = decomposition.adapted[m]
        target_basis = decomposition.adapted[m - 2]
        target_position = {entry: r for r, entry in enumerate(target_basis)}
        lowered = [[ZERO] * len(source_basis) for _ in target_basis]
        for c, (l, base, k) in enumerate(source_basis):
            if l == 0:
                continue
            j = n - base
            lowered[target_position[(l - 1, base, k)]][c] = Fraction(l * (j - l + 1))
        q_target = np.array(decomposition.change_of_basis[m - 2], dtype=object).reshape(len(target_basis), -1)
        q_inverse = np.array(decomposition.inverse[m], dtype=object).reshape(len(source_basis), -1)
        f.blocks[m] = q_target.dot(np.array(lowered, dtype=object).reshape(len(target_basis), -1)).dot(q_inverse)
    action = Sl2Action(ring, omega, e, h, f, decomposition)
    defects = action.relation_defects()
    if defects:
        raise InternalConsistencyError(f"sl2 relations fail: {defects}")
    for m in range(n + 1):
        kernel_dim = ring.betti(m) - (dense_rank(f.block(m).tolist()) if m >= 2 else 0)
        if kernel_dim != len(decomposition.primitives.get(m, [])):
            raise InternalConsistencyError(f"ker f in degree {m} differs from the primitive classes")
    return action


# --- polarization ----------------------------------------------------------------------------

def polarization_pairing(ring: CohomologyRing, omega: Optional[SparseVector], j: int) -> np.ndarray:
    """Gram matrix of <a, b> = ∫ w^j a b on H^{n-j}."""
    omega = _omega(ring, omega)
    degree = ring.complex_dimension - j
    source = ring.basis.in_degree(degree)
    power = ring.power(omega, j)
    gram = _zeros(len(source), len(source))
    for r, a in enumerate(source):
        left = ring.multiply(power, ring.class_vector(a))
        for c, b in enumerate(source):
            gram[r, c] = ring.integrate(ring.multiply(left, ring.class_vector(b)))
    return gram


@dataclass
class PolarizationReport:
    degree: int
    gram: np.ndarray
    rank: int
    parity: str

    @property
    def nondegenerate(self) -> bool:
        return self.rank == self.gram.shape[0]


def polarization_on_primitives(sl2: Sl2Action, j: int) -> PolarizationReport:
    ring = sl2.ring
    degree = ring.complex_dimension - j
    primitives = sl2.decomposition.primitives.get(degree, [])
    power = ring.power(sl2.omega, j)
    gram = _zeros(len(primitives), len(primitives))
    for r, a in enumerate(primitives):
        left = ring.multiply(power, a)
        for c, b in enumerate(primitives):
            gram[r, c] = ring.integrate(ring.multiply(left, b))
    if np.array_equal(gram, gram.T):
        parity = "symmetric"
    elif np.array_equal(gram, -gram.T):
        parity = "antisymmetric"
    else:
        parity = "neither"
    return PolarizationReport(degree, gram, dense_rank(gram.tolist()), parity)


# --- derivation algebras ---------------------------------------------------------------------

def _unknowns(ring: CohomologyRing) -> List[Tuple[int, int, int]]:
    """(degree, target class, source class) for every entry of a degree-0 map on H^{>0}."""
    out = []
    for m in range(1, ring.real_dimension + 1):
        classes = ring.basis.in_degree(m)
        out.extend((m, i, j) for j in classes for i in classes)
    return out


def _constraint_rows(ring: CohomologyRing, unknowns: List[Tuple[int, int, int]],
                     fixed: Sequence[SparseVector]) -> List[Dict[int, Fraction]]:
    """Rows over unknown positions: Leibniz on pairs u <= v, and δ(c) = 0 for fixed c."""
    position = {(i, j): k for k, (_, i, j) in enumerate(unknowns)}
    by_degree: Dict[int, Tuple[int, ...]] = {m: ring.basis.in_degree(m) for m in range(ring.real_dimension + 1)}
    deg = ring.basis.degree
    rows: List[Dict[int, Fraction]] = []
    reduced = ring.reduced_indices()
    for a, u in enumerate(reduced):
        for v in reduced[a:]:
            if deg(u) + deg(v) > ring.real_dimension:
                continue
            # one row per output class l of δ(uv) - δ(u)v - uδ(v)
            split: Dict[int, Dict[int, Fraction]] = {}

            def put(l: int, unknown: Tuple[int, int], c: Fraction) -> None:
                row = split.setdefault(l, {})
                key = position[unknown]
                row[key] = row.get(key, ZERO) + c

            for k, c in ring.product_entries(u, v).items():
                for l in by_degree[deg(k)]:
                    put(l, (l, k), c)
            for i in by_degree[deg(u)]:
                for l, c in ring.product_entries(i, v).items():
                    put(l, (i, u), -c)
            for i in by_degree[deg(v)]:
                for l, c in ring.product_entries(u, i).items():
                    put(l, (i, v), -c)
            for row in split.values():
                row = {k: x for k, x in row.items() if x}
                if row:
                    rows.append(row)
    for vector in fixed:
        per_target: Dict[int, Dict[int, Fraction]] = {}
        for k, c in vector.items():
            for l in by_degree[deg(k)]:
                if (l, k) in position:
                    per_target.setdefault(l, {})[position[(l, k)]] = c
        rows.extend(r for r in per_target.values() if r)
    return rows


@dataclass
class DerivationAlgebra:
    """Degree-0 derivations of a ring annihilating ``fixed``; the basis is skipped above the cap."""
    ring: CohomologyRing
    fixed: List[str]
    dimension: int
    basis: Optional[List[GradedOperator]] = None

    @property
    def skipped(self) -> bool:
        return self.basis is None

    def bracket_constants(self) -> Dict[Tuple[int, int], Dict[int, Fraction]]:
        """[δa, δb] in the basis, for a < b."""
        if self.basis is None:
            raise DerivationError("derivation basis was not computed")
        echelon = EchelonBasis()
        for k, op in enumerate(self.basis):
            echelon.add(op.entries(), label=k)
        table = {}
        for a in range(len(self.basis)):
            for b in range(a + 1, len(self.basis)):
                value = commutator(self.basis[a], self.basis[b])
                coords = echelon.express(value.entries())
                if coords is None:
                    raise InternalConsistencyError(f"bracket of basis elements {a}, {b} leaves the algebra")
                if coords:
                    table[(a, b)] = coords
        return table


def _vector_label(ring: CohomologyRing, vector: SparseVector) -> str:
    names = ring.basis.names
    return " + ".join(f"{c}*{names[i]}" if c != 1 else names[i] for i, c in vector.items()) or "0"


def derivation_algebra(ring: CohomologyRing, fixed_classes: Optional[Sequence[SparseVector]] = None,
                       extra_fixed: Optional[Sequence[SparseVector]] = None,
                       max_basis: int = DEFAULT_MAX_DERIVATION_BASIS) -> DerivationAlgebra:
    """
    Solve Leibniz on all basis pairs plus δ(c) = 0 for the fixed classes.
    ``fixed_classes`` defaults to [w] when the ring has a Kahler class; ``extra_fixed``
    appends a subspace V to obtain g_V.
    """
    ring.require_valid()
    if fixed_classes is None:
        fixed_classes = [ring.omega] if ring.omega is not None else []
    fixed = list(fixed_classes) + list(extra_fixed or [])
    unknowns = _unknowns(ring)
    rows = _constraint_rows(ring, unknowns, fixed)
    logger.increment_metric("derivation_unknowns", len(unknowns))
    logger.log(f"derivation algebra of {ring.name}: {len(unknowns)} unknowns, {len(rows)} constraints")
    dimension = len(unknowns) - column_rank(rows)
    algebra = DerivationAlgebra(ring, [_vector_label(ring, v) for v in fixed], dimension)
    if dimension > max_basis:
        logger.info(f"derivation basis of dimension {dimension} exceeds {max_basis}; skipped")
        return algebra

    columns: List[Dict[int, Fraction]] = [{} for _ in unknowns]
    for r, row in enumerate(rows):
        for k, c in row.items():
            columns[k][r] = c
    basis = []
    for combo in kernel_combinations(columns):
        images: Dict[int, Dict[int, Fraction]] = {}
        for k, c in combo.items():
            _, i, j = unknowns[k]
            images.setdefault(j, {})[i] = images.get(j, {}).get(i, ZERO) + c
        basis.append(GradedOperator.from_images(ring, 0, lambda j, im=images: SparseVector(len(ring), im.get(j, {}))))
    algebra.basis = basis
    return algebra


def extend_derivation(ring: CohomologyRing, values: Mapping[str, SparseVector],
                      separator: str = "*") -> GradedOperator:
    """
    Degree-0 derivation from values on algebra generators, extended to basis
    classes whose names are products of generators joined by ``separator``.
    """
    cache: Dict[str, SparseVector] = {}

    def delta(name: str) -> SparseVector:
        if name in cache:
            return cache[name]
        if name == "1":
            result = SparseVector.zero(len(ring))
        elif separator in name:
            head, tail = name.split(separator, 1)
            tail_vector = ring.class_vector(tail)
            head_vector = ring.class_vector(head)
            # the basis class equals head*tail up to the sign of the stored product
            product = ring.multiply(head_vector, tail_vector)
            scale = product[ring.basis.index(name)]
            if not scale:
                raise DerivationError(f"{name} is not the product {head}{separator}{tail}")
            result = (ring.multiply(delta(head), tail_vector) + ring.multiply(head_vector, delta(tail))) * (ONE / scale)
        else:
            result = values.get(name, SparseVector.zero(len(ring)))
        cache[name] = result
        return result

    return GradedOperator.from_images(ring, 0, lambda i: delta(ring.basis.name(i)))


def leibniz_violations(ring: CohomologyRing, delta: GradedOperator) -> List[Tuple[str, str]]:
    names = ring.basis.names
    failures = []
    reduced = ring.reduced_indices()
    for a, u in enumerate(reduced):
        for v in reduced[a:]:
            uv = ring.multiply(ring.class_vector(u), ring.class_vector(v))
            lhs = delta.apply(uv)
            rhs = (ring.multiply(delta.apply(ring.class_vector(u)), ring.class_vector(v))
                   + ring.multiply(ring.class_vector(u), delta.apply(ring.class_vector(v))))
            if lhs != rhs:
                failures.append((names[u], names[v]))
    return failures


def _operators(g: Union[DerivationAlgebra, Iterable[GradedOperator]]) -> List[GradedOperator]:
    if isinstance(g, DerivationAlgebra):
        if g.basis is None:
            raise DerivationError("derivation basis was not computed")
        return g.basis
    return list(g)


def sl2_commutant_check(g: Union[DerivationAlgebra, Iterable[GradedOperator]], sl2: Sl2Action) -> List[Tuple[int, str]]:
    """(basis index, generator) for every δ failing to commute with e, h or f."""
    violations = []
    for k, delta in enumerate(_operators(g)):
        if delta.ring is not sl2.ring and delta.ring != sl2.ring:
            raise DerivationError("derivation and sl2 action live on different rings")
        for label, op in (("e", sl2.e), ("h", sl2.h), ("f", sl2.f)):
            if not commutator(delta, op).is_zero():
                violations.append((k, label))
    return violations


def preserves_primitives(g: Union[DerivationAlgebra, Iterable[GradedOperator]],
                         decomposition: PrimitiveDecomposition) -> List[Tuple[int, int]]:
    """(basis index, degree) where some δ(p) leaves P^m."""
    failures = []
    for k, delta in enumerate(_operators(g)):
        for m, primitives in decomposition.primitives.items():
            for p in primitives:
                parts = decomposition.components(delta.apply(p), m)
                if any(any(x for x in coords) for l, coords in parts.items() if l > 0):
                    failures.append((k, m))
                    break
    return failures


def restriction_injectivity(g: Union[DerivationAlgebra, Iterable[GradedOperator]],
                            decomposition: PrimitiveDecomposition) -> Tuple[bool, List[Dict[int, Fraction]]]:
    """Whether δ ↦ (δ restricted to the primitives, in adapted coordinates) is injective."""
    columns = []
    for delta in _operators(g):
        column: Dict[tuple, Fraction] = {}
        for m, primitives in sorted(decomposition.primitives.items()):
            for a, p in enumerate(primitives):
                for l, coords in decomposition.components(delta.apply(p), m).items():
                    for b, x in enumerate(coords):
                        if x:
                            column[(m, a, l, b)] = x
        columns.append(column)
    kernel = kernel_combinations(columns)
    return not kernel, kernel


def trace_form(g: Union[DerivationAlgebra, Iterable[GradedOperator]]) -> Tuple[List[List[Fraction]], int]:
    """Gram matrix tr(δa δb) on H^• and its rank."""
    operators = _operators(g)
    gram = [[a.compose(b).trace() for b in operators] for a in operators]
    return gram, dense_rank(gram)
