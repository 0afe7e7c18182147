"""
Finite graded-commutative rational cohomology rings with Poincare duality and
the reduced homology coalgebra obtained by transposing the cup product.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from core.errors import RingValidationError
from core.exact_linear import (
    ONE, ZERO, GradedBasis, SparseMap, SparseVector, add_scaled, column_rank,
    rank_kernel_image, to_scalar,
)

ClassRef = Union[str, int]


def _sign(a: int, b: int) -> Fraction:
    return -ONE if (a * b) % 2 else ONE


class CohomologyRing:
    """
    A finite graded-commutative algebra over Q with an integration functional.

    Args:
        real_dimension: the top degree of the ring (2n for a manifold of complex dimension n).
        basis: graded basis; its single degree-0 element is the unit.
        products: ``(left, right) -> {result: coeff}`` with names or indices. Products
            with the unit are implicit. When only one of ``(u, v)`` and ``(v, u)`` is
            given, the other follows from graded commutativity.
        integration: ``{top class: value}``, the functional ``∫``.
        omega: optional Kahler class ``{class: coeff}`` in degree 2.
        pontryagin: optional ``{k: {class: coeff}}`` with ``p_k`` in degree 4k.
        simply_connected: whether validation requires H^1 = H^{top-1} = 0.
        name: label used in reports.
    """

    def __init__(self, real_dimension: int, basis: GradedBasis,
                 products: Mapping[Tuple[ClassRef, ClassRef], Mapping[ClassRef, object]],
                 integration: Mapping[ClassRef, object],
                 omega: Optional[Mapping[ClassRef, object]] = None,
                 pontryagin: Optional[Mapping[int, Mapping[ClassRef, object]]] = None,
                 simply_connected: bool = True,
                 name: str = "ring"):
        self.real_dimension = real_dimension
        self.basis = basis
        self.name = name
        self.simply_connected = simply_connected
        units = basis.in_degree(0)
        self.unit_index: Optional[int] = units[0] if len(units) == 1 else None

        self._products: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
        explicit = set()
        for (left, right), result in products.items():
            i, j = self._idx(left), self._idx(right)
            explicit.add((i, j))
            entries = self._entries(result)
            if entries:
                self._products[(i, j)] = entries
        for i, j in sorted(explicit):
            if (j, i) not in explicit and (i, j) in self._products:
                sign = _sign(basis.degree(i), basis.degree(j))
                self._products[(j, i)] = {k: sign * v for k, v in self._products[(i, j)].items()}
        if self.unit_index is not None:
            u = self.unit_index
            for k in range(len(basis)):
                if (u, k) not in explicit:
                    self._products[(u, k)] = {k: ONE}
                if (k, u) not in explicit:
                    self._products[(k, u)] = {k: ONE}

        self.integration: Dict[int, Fraction] = self._entries(integration)
        self.omega: Optional[SparseVector] = (
            SparseVector(len(basis), self._entries(omega)) if omega is not None else None)
        self.pontryagin: Dict[int, SparseVector] = {
            int(k): SparseVector(len(basis), self._entries(v)) for k, v in sorted((pontryagin or {}).items())}
        self._report = None
        self._coalgebra = None

    # -- construction helpers -------------------------------------------------

    def _idx(self, ref: ClassRef) -> int:
        return ref if isinstance(ref, int) else self.basis.index(ref)

    def _entries(self, mapping: Mapping[ClassRef, object]) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        for ref, value in mapping.items():
            value = to_scalar(value)
            if value:
                out[self._idx(ref)] = out.get(self._idx(ref), ZERO) + value
        return {k: v for k, v in out.items() if v}

    # -- basic data -----------------------------------------------------------

    def __repr__(self) -> str:
        return f"CohomologyRing({self.name!r}, dim={self.real_dimension}, betti={self.betti_numbers()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, CohomologyRing):
            return NotImplemented
        return (self.real_dimension == other.real_dimension
                and self.basis == other.basis
                and self._products == other._products
                and self.integration == other.integration
                and self.omega == other.omega
                and self.pontryagin == other.pontryagin
                and self.simply_connected == other.simply_connected)

    __hash__ = None

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def complex_dimension(self) -> int:
        return self.real_dimension // 2

    def betti(self, degree: int) -> int:
        return self.basis.dimension(degree)

    def betti_numbers(self) -> List[int]:
        return [self.betti(d) for d in range(self.real_dimension + 1)]

    def reduced_indices(self) -> List[int]:
        return [i for i in range(len(self.basis)) if i != self.unit_index]

    def vector(self, mapping: Mapping[ClassRef, object]) -> SparseVector:
        return SparseVector(len(self.basis), self._entries(mapping))

    def class_vector(self, ref: ClassRef) -> SparseVector:
        return SparseVector.unit(len(self.basis), self._idx(ref))

    def unit_vector(self) -> SparseVector:
        return SparseVector.unit(len(self.basis), self.unit_index)

    def degree_of(self, vector: SparseVector) -> Optional[int]:
        """The common degree of a homogeneous vector (None for zero or mixed)."""
        degrees = {self.basis.degree(i) for i in vector.support()}
        return degrees.pop() if len(degrees) == 1 else None

    # -- multiplication -------------------------------------------------------

    def product_entries(self, i: int, j: int) -> Mapping[int, Fraction]:
        return self._products.get((i, j), {})

    def product(self, left: ClassRef, right: ClassRef) -> SparseVector:
        return SparseVector(len(self.basis), self.product_entries(self._idx(left), self._idx(right)))

    def nonzero_products(self) -> List[Tuple[Tuple[int, int], Dict[int, Fraction]]]:
        return sorted(self._products.items())

    def multiply_entries(self, a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        for i, x in a.items():
            for j, y in b.items():
                entries = self._products.get((i, j))
                if entries:
                    add_scaled(out, x * y, entries)
        return out

    def multiply(self, u: SparseVector, v: SparseVector) -> SparseVector:
        return SparseVector(len(self.basis), self.multiply_entries(u.entries(), v.entries()))

    def power(self, v: SparseVector, k: int) -> SparseVector:
        result = self.unit_vector()
        for _ in range(k):
            result = self.multiply(result, v)
        return result

    def integrate(self, v: SparseVector) -> Fraction:
        return sum((c * self.integration.get(i, ZERO) for i, c in v.items()), ZERO)

    def pairing(self, i: int, j: int) -> Fraction:
        return sum((c * self.integration.get(k, ZERO) for k, c in self.product_entries(i, j).items()), ZERO)

    def structure_table(self) -> Dict[Tuple[str, str], Dict[str, Fraction]]:
        """Products of reduced classes keyed by names; used for structural comparison."""
        names = self.basis.names
        return {(names[i], names[j]): {names[k]: v for k, v in sorted(entries.items())}
                for (i, j), entries in self.nonzero_products()
                if self.unit_index not in (i, j)}

    def rename(self, mapping: Mapping[str, str], name: Optional[str] = None) -> "CohomologyRing":
        """Same ring with basis names replaced through ``mapping``; order is kept."""
        new_basis = GradedBasis((mapping.get(n, n), d) for n, d in self.basis)
        products = {(i, j): dict(entries) for (i, j), entries in self._products.items()}
        ring = CohomologyRing(
            self.real_dimension, new_basis, products, dict(self.integration),
            omega=self.omega.entries() if self.omega is not None else None,
            pontryagin={k: v.entries() for k, v in self.pontryagin.items()},
            simply_connected=self.simply_connected, name=name or self.name)
        return ring

    # -- cached derived data --------------------------------------------------

    def validation(self) -> "ValidationReport":
        if self._report is None:
            self._report = validate_ring(self)
        return self._report

    def require_valid(self) -> None:
        report = self.validation()
        if not report.is_valid:
            raise RingValidationError(
                f"ring {self.name!r} violates: {', '.join(report.names())}", report)

    def summary(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "real_dimension": self.real_dimension,
            "betti": self.betti_numbers(),
            "omega": self.omega is not None,
        }


# --- validation ---------------------------------------------------------------

@dataclass
class Violation:
    invariant: str
    detail: str
    witness: Optional[object] = None


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)
    notes: Dict[str, object] = field(default_factory=dict)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def names(self) -> List[str]:
        seen: List[str] = []
        for v in self.violations:
            if v.invariant not in seen:
                seen.append(v.invariant)
        return seen

    def add(self, invariant: str, detail: str, witness=None) -> None:
        self.violations.append(Violation(invariant, detail, witness))


def _check_associativity(ring: CohomologyRing, report: ValidationReport) -> None:
    deg = ring.basis.degree
    top = ring.real_dimension
    reduced = ring.reduced_indices()
    triples = set()
    for (i, j), _ in ring.nonzero_products():
        if ring.unit_index in (i, j):
            continue
        for k in reduced:
            if deg(i) + deg(j) + deg(k) <= top:
                triples.add((i, j, k))
                triples.add((k, i, j))
    for i, j, k in sorted(triples):
        left = ring.multiply_entries(ring.product_entries(i, j), {k: ONE})
        right = ring.multiply_entries({i: ONE}, ring.product_entries(j, k))
        if left != right:
            names = ring.basis.names
            report.add("associativity", f"({names[i]}*{names[j]})*{names[k]} != {names[i]}*({names[j]}*{names[k]})",
                       (names[i], names[j], names[k]))
            return


def validate_ring(ring: CohomologyRing) -> ValidationReport:
    """Check every ring invariant; returns a report instead of raising."""
    report = ValidationReport()
    basis = ring.basis
    names = basis.names
    deg = basis.degree
    top = ring.real_dimension

    if ring.unit_index is None:
        report.add("unit", f"expected one degree-0 class, found {basis.dimension(0)}")
    if top < 1 or basis.max_degree > top:
        report.add("real dimension", f"classes up to degree {basis.max_degree} in a ring of dimension {top}")

    for (i, j), entries in ring.nonzero_products():
        expected = deg(i) + deg(j)
        bad = [k for k in entries if deg(k) != expected]
        if bad or expected > top:
            report.add("degree additivity", f"{names[i]}*{names[j]} leaves degree {expected}", (names[i], names[j]))
            break

    for i in range(len(basis)):
        for j in range(i, len(basis)):
            a = ring.product_entries(i, j)
            b = ring.product_entries(j, i)
            sign = _sign(deg(i), deg(j))
            if dict(b) != {k: sign * v for k, v in a.items()} or (i == j and sign == -ONE and a):
                report.add("graded commutativity", f"{names[i]}*{names[j]} vs {names[j]}*{names[i]}",
                           (names[i], names[j]))
                break
        else:
            continue
        break

    if ring.unit_index is not None and not any(v for v in report.violations if v.invariant == "graded commutativity"):
        _check_associativity(ring, report)

    if not ring.integration:
        report.add("fundamental class", "no integration functional")
    elif any(deg(i) != top for i in ring.integration):
        report.add("fundamental class", "integration functional is not supported in the top degree")
    else:
        for d in range(0, top // 2 + 1):
            rows, cols = basis.in_degree(d), basis.in_degree(top - d)
            if len(rows) != len(cols):
                report.add("Poincaré duality", f"b_{d} = {len(rows)} but b_{top - d} = {len(cols)}", (d, top - d))
                continue
            if not rows:
                continue
            columns = [{r: ring.pairing(r, c) for r in rows} for c in cols]
            columns = [{r: v for r, v in col.items() if v} for col in columns]
            if column_rank(columns) != len(rows):
                report.add("Poincaré duality", f"pairing between degrees {d} and {top - d} is singular", (d, top - d))

    if ring.simply_connected and (basis.dimension(1) or (top > 2 and basis.dimension(top - 1))):
        report.add("simply connected", f"b_1 = {basis.dimension(1)}, b_{top - 1} = {basis.dimension(top - 1)}")

    if ring.omega is not None:
        if ring.omega.is_zero() or any(deg(i) != 2 for i in ring.omega.support()):
            report.add("omega", "Kahler class must be a nonzero degree-2 class")
        elif top % 2 == 0 and ring.unit_index is not None:
            report.notes["omega_top_nonzero"] = not ring.power(ring.omega, top // 2).is_zero()
    for k, p in ring.pontryagin.items():
        if any(deg(i) != 4 * k for i in p.support()):
            report.add("pontryagin", f"p_{k} is not in degree {4 * k}")
    return report


# --- homology coalgebra -------------------------------------------------------

class HomologyCoalgebra:
    """
    Reduced rational homology with the reduced coproduct.

    A homology class is indexed by the ring basis index of its dual
    cohomology class, and Δ(x) carries coefficient ``c`` on ``a⊗b`` exactly
    when ``c`` is the coefficient of ``x`` in the cup product ``a·b``.
    """

    def __init__(self, ring: CohomologyRing):
        self.ring = ring
        self.classes = ring.reduced_indices()
        self._delta: Dict[int, Dict[Tuple[int, int], Fraction]] = {x: {} for x in self.classes}
        for (a, b), entries in ring.nonzero_products():
            if ring.unit_index in (a, b):
                continue
            for x, c in entries.items():
                if x in self._delta:
                    self._delta[x][(a, b)] = c

    def degree(self, x: int) -> int:
        return self.ring.basis.degree(x)

    def in_degree(self, t: int) -> List[int]:
        return [x for x in self.ring.basis.in_degree(t) if x != self.ring.unit_index]

    def delta(self, x: int) -> Dict[Tuple[int, int], Fraction]:
        return dict(self._delta.get(x, {}))

    def tensor_pairs(self, t: int) -> List[Tuple[int, int]]:
        deg = self.degree
        return [(a, b) for a in self.classes for b in self.classes if deg(a) + deg(b) == t]

    def as_map(self, t: int) -> Tuple[SparseMap, List[Tuple[int, int]]]:
        """Δ on H̃_t as a sparse map into the listed pairs of ⊕ H̃_j⊗H̃_k."""
        pairs = self.tensor_pairs(t)
        position = {p: i for i, p in enumerate(pairs)}
        columns = [{position[p]: c for p, c in self._delta[x].items()} for x in self.in_degree(t)]
        return SparseMap(len(columns), len(pairs), columns), pairs

    def primitives(self, t: int) -> List[SparseVector]:
        if not self.in_degree(t):
            return []
        linear_map, _ = self.as_map(t)
        return rank_kernel_image(linear_map).kernel

    def transpose_table(self) -> Dict[Tuple[int, int], Dict[int, Fraction]]:
        """Cup products of reduced classes recovered from Δ."""
        table: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
        for x, terms in self._delta.items():
            for pair, c in terms.items():
                table.setdefault(pair, {})[x] = c
        return table

    def coassociativity_defects(self) -> List[int]:
        defects = []
        for x in self.classes:
            left: Dict[Tuple[int, int, int], Fraction] = {}
            right: Dict[Tuple[int, int, int], Fraction] = {}
            for (a, b), c in self._delta[x].items():
                for (a1, a2), c1 in self._delta[a].items():
                    add_scaled(left, c * c1, {(a1, a2, b): ONE})
                for (b1, b2), c2 in self._delta[b].items():
                    add_scaled(right, c * c2, {(a, b1, b2): ONE})
            if left != right:
                defects.append(x)
        return defects


def reduced_coproduct(ring: CohomologyRing) -> HomologyCoalgebra:
    """Transpose of the cup product on reduced classes (cached per ring)."""
    ring.require_valid()
    if ring._coalgebra is None:
        ring._coalgebra = HomologyCoalgebra(ring)
    return ring._coalgebra


def coalgebra_primitives(ring: CohomologyRing, degree: int) -> List[SparseVector]:
    """Kernel of Δ on H̃_degree, in coordinates over ``ring.basis.in_degree(degree)``."""
    if degree < 1 or degree > ring.real_dimension:
        return []
    return reduced_coproduct(ring).primitives(degree)
