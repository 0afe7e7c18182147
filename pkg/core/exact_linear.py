"""
Exact rational linear algebra over Fraction: graded bases, sparse vectors and
maps, elimination, quotients and Koszul signs.

Degree bookkeeping is left to callers; nothing here knows about gradings
beyond the plain `GradedBasis` container.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from core.errors import LinearAlgebraError
from utils.logger import logger

Scalar = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def to_scalar(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise LinearAlgebraError(f"floating point coefficient {value!r} is not exact")
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise LinearAlgebraError(f"not a rational number: {value!r}") from exc


def fstr(x) -> str:
    x = Fraction(x)
    a, b = x.numerator, x.denominator
    if b == 1:
        return str(a)
    return f"{a}/{b}"


def add_scaled(target: dict, factor: Fraction, source: Mapping) -> None:
    """target += factor * source, dropping zeros."""
    for key, value in source.items():
        new = target.get(key, ZERO) + factor * value
        if new:
            target[key] = new
        else:
            target.pop(key, None)


class GradedBasis:
    """Ordered list of (name, degree) pairs with O(1) per-degree slices."""

    def __init__(self, entries: Iterable[Tuple[str, int]]):
        self._names: List[str] = []
        self._degrees: List[int] = []
        self._index: Dict[str, int] = {}
        self._by_degree: Dict[int, List[int]] = {}
        for name, degree in entries:
            if name in self._index:
                raise LinearAlgebraError(f"duplicate basis name {name!r}")
            if not isinstance(degree, int) or degree < 0:
                raise LinearAlgebraError(f"basis element {name!r} has invalid degree {degree!r}")
            self._index[name] = len(self._names)
            self._by_degree.setdefault(degree, []).append(len(self._names))
            self._names.append(name)
            self._degrees.append(degree)
        self._slices = {d: tuple(ix) for d, ix in self._by_degree.items()}

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(zip(self._names, self._degrees))

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedBasis) and self.entries() == other.entries()

    def __repr__(self) -> str:
        return f"GradedBasis({self.entries()!r})"

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self._names)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(self._degrees)

    @property
    def max_degree(self) -> int:
        return max(self._degrees) if self._degrees else 0

    def entries(self) -> List[Tuple[str, int]]:
        return list(zip(self._names, self._degrees))

    def has(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise LinearAlgebraError(f"unknown basis element {name!r}") from None

    def name(self, i: int) -> str:
        return self._names[i]

    def degree(self, i: int) -> int:
        return self._degrees[i]

    def in_degree(self, degree: int) -> Tuple[int, ...]:
        return self._slices.get(degree, ())

    def dimension(self, degree: int) -> int:
        return len(self._slices.get(degree, ()))


class SparseVector:
    """Vector in Q^dim stored as index -> Fraction without explicit zeros."""

    __slots__ = ("dim", "_entries")

    def __init__(self, dim: int, entries: Optional[Mapping[int, object]] = None):
        self.dim = dim
        clean: Dict[int, Fraction] = {}
        for i, value in (entries or {}).items():
            if not 0 <= i < dim:
                raise LinearAlgebraError(f"index {i} outside dimension {dim}")
            value = to_scalar(value)
            if value:
                clean[i] = value
        self._entries = clean

    @classmethod
    def zero(cls, dim: int) -> "SparseVector":
        return cls(dim)

    @classmethod
    def unit(cls, dim: int, i: int) -> "SparseVector":
        return cls(dim, {i: ONE})

    @classmethod
    def from_dense(cls, values: Sequence) -> "SparseVector":
        return cls(len(values), {i: v for i, v in enumerate(values)})

    def __len__(self) -> int:
        return self.dim

    def __getitem__(self, i: int) -> Fraction:
        return self._entries.get(i, ZERO)

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {fstr(v)}" for i, v in self.items())
        return f"SparseVector({self.dim}, {{{body}}})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.dim == other.dim and self._entries == other._entries

    __hash__ = None

    def _check(self, other: "SparseVector") -> None:
        if self.dim != other.dim:
            raise LinearAlgebraError(f"dimension mismatch {self.dim} vs {other.dim}")

    def __add__(self, other: "SparseVector") -> "SparseVector":
        self._check(other)
        out = dict(self._entries)
        add_scaled(out, ONE, other._entries)
        return SparseVector(self.dim, out)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        self._check(other)
        out = dict(self._entries)
        add_scaled(out, -ONE, other._entries)
        return SparseVector(self.dim, out)

    def __neg__(self) -> "SparseVector":
        return SparseVector(self.dim, {i: -v for i, v in self._entries.items()})

    def __mul__(self, scalar) -> "SparseVector":
        s = to_scalar(scalar)
        return SparseVector(self.dim, {i: s * v for i, v in self._entries.items()})

    __rmul__ = __mul__

    def items(self) -> List[Tuple[int, Fraction]]:
        return sorted(self._entries.items())

    def entries(self) -> Dict[int, Fraction]:
        return dict(self._entries)

    def support(self) -> List[int]:
        return sorted(self._entries)

    def is_zero(self) -> bool:
        return not self._entries

    def leading_index(self) -> Optional[int]:
        return min(self._entries) if self._entries else None

    def dot(self, other: "SparseVector") -> Fraction:
        self._check(other)
        return sum((v * other[i] for i, v in self._entries.items()), ZERO)

    def to_dense(self) -> List[Fraction]:
        return [self._entries.get(i, ZERO) for i in range(self.dim)]


class SparseMap:
    """Linear map Q^domain -> Q^codomain stored column by column."""

    def __init__(self, domain_dim: int, codomain_dim: int, columns: Sequence[Mapping[int, object]]):
        if len(columns) != domain_dim:
            raise LinearAlgebraError(f"expected {domain_dim} columns, got {len(columns)}")
        self.domain_dim = domain_dim
        self.codomain_dim = codomain_dim
        self._columns = [SparseVector(codomain_dim, col) for col in columns]

    @classmethod
    def zero(cls, domain_dim: int, codomain_dim: int) -> "SparseMap":
        return cls(domain_dim, codomain_dim, [{} for _ in range(domain_dim)])

    @classmethod
    def identity(cls, n: int) -> "SparseMap":
        return cls(n, n, [{i: ONE} for i in range(n)])

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMap":
        codomain = len(rows)
        domain = len(rows[0]) if rows else 0
        if any(len(r) != domain for r in rows):
            raise LinearAlgebraError("ragged matrix")
        columns = [{i: rows[i][j] for i in range(codomain)} for j in range(domain)]
        return cls(domain, codomain, columns)

    def __repr__(self) -> str:
        return f"SparseMap({self.domain_dim} -> {self.codomain_dim})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMap):
            return NotImplemented
        return (self.domain_dim, self.codomain_dim, self._columns) == (
            other.domain_dim, other.codomain_dim, other._columns)

    __hash__ = None

    def column(self, j: int) -> SparseVector:
        return self._columns[j]

    def columns(self) -> List[SparseVector]:
        return list(self._columns)

    def apply(self, vector: SparseVector) -> SparseVector:
        if vector.dim != self.domain_dim:
            raise LinearAlgebraError(f"vector of dimension {vector.dim} applied to map from {self.domain_dim}")
        out: Dict[int, Fraction] = {}
        for j, coeff in vector.items():
            add_scaled(out, coeff, self._columns[j].entries())
        return SparseVector(self.codomain_dim, out)

    def compose(self, other: "SparseMap") -> "SparseMap":
        """self after other."""
        if other.codomain_dim != self.domain_dim:
            raise LinearAlgebraError("composition of incompatible maps")
        return SparseMap(other.domain_dim, self.codomain_dim,
                         [self.apply(col).entries() for col in other.columns()])

    def transpose(self) -> "SparseMap":
        rows: List[Dict[int, Fraction]] = [{} for _ in range(self.codomain_dim)]
        for j, col in enumerate(self._columns):
            for i, v in col.items():
                rows[i][j] = v
        return SparseMap(self.codomain_dim, self.domain_dim, rows)

    def to_dense(self) -> List[List[Fraction]]:
        return [[self._columns[j][i] for j in range(self.domain_dim)] for i in range(self.codomain_dim)]

    def is_zero(self) -> bool:
        return all(col.is_zero() for col in self._columns)


# --- elimination -----------------------------------------------------------

def _reduce_leading(vec: dict, pivots: dict, combo: Optional[dict]) -> Optional[Hashable]:
    """Clear leading entries against stored pivots; return the new lead or None."""
    while vec:
        lead = min(vec)
        row = pivots.get(lead)
        if row is None:
            return lead
        pvec, pcombo = row
        factor = vec[lead]
        add_scaled(vec, -factor, pvec)
        if combo is not None:
            add_scaled(combo, -factor, pcombo)
    return None


def _eliminate(columns: Iterable[Mapping], track: bool):
    """Column elimination with the smallest row key as pivot.

    Row keys may be any mutually comparable hashables. Returns the pivot table,
    the kernel combinations (only when ``track``) and the pivot column indices.
    """
    pivots: Dict[Hashable, Tuple[dict, dict]] = {}
    kernel: List[Dict[int, Fraction]] = []
    pivot_columns: List[int] = []
    count = 0
    for j, column in enumerate(columns):
        count += 1
        vec = dict(column)
        combo = {j: ONE} if track else None
        lead = _reduce_leading(vec, pivots, combo)
        if lead is None:
            if track:
                kernel.append(combo)
            continue
        inv = ONE / vec[lead]
        vec = {k: v * inv for k, v in vec.items()}
        if track:
            combo = {k: v * inv for k, v in combo.items()}
        pivots[lead] = (vec, combo if track else {})
        pivot_columns.append(j)
    logger.increment_metric("eliminated_columns", count)
    return pivots, kernel, pivot_columns


@dataclass
class RankResult:
    rank: int
    kernel: List[SparseVector] = field(default_factory=list)
    image: List[SparseVector] = field(default_factory=list)
    pivot_columns: List[int] = field(default_factory=list)


def rank_kernel_image(linear_map: SparseMap) -> RankResult:
    """Rank, kernel basis and image basis of a sparse map.

    The image basis is the set of original pivot columns; kernel vectors are
    expressed in the domain's standard coordinates.
    """
    columns = [col.entries() for col in linear_map.columns()]
    _, kernel, pivot_columns = _eliminate(columns, track=True)
    return RankResult(
        rank=len(pivot_columns),
        kernel=[SparseVector(linear_map.domain_dim, k) for k in kernel],
        image=[linear_map.column(j) for j in pivot_columns],
        pivot_columns=pivot_columns,
    )


def column_rank(columns: Iterable[Mapping]) -> int:
    """Rank of a family of sparse columns keyed by arbitrary comparable row keys."""
    _, _, pivot_columns = _eliminate(columns, track=False)
    return len(pivot_columns)


def kernel_combinations(columns: Sequence[Mapping]) -> List[Dict[int, Fraction]]:
    """Kernel of the column family as combinations of column indices."""
    _, kernel, _ = _eliminate(columns, track=True)
    return kernel


VectorLike = Union[SparseVector, Sequence]


def _as_entries(vector: VectorLike, ambient_dim: int) -> Dict[int, Fraction]:
    if isinstance(vector, SparseVector):
        if vector.dim != ambient_dim:
            raise LinearAlgebraError(f"vector of dimension {vector.dim} in ambient space of dimension {ambient_dim}")
        return vector.entries()
    if len(vector) != ambient_dim:
        raise LinearAlgebraError(f"vector of length {len(vector)} in ambient space of dimension {ambient_dim}")
    return {i: to_scalar(v) for i, v in enumerate(vector) if v}


def quotient_dim(ambient_dim: int, subspace: Iterable[VectorLike]) -> int:
    """Dimension of Q^ambient_dim modulo the span of ``subspace``."""
    return ambient_dim - column_rank(_as_entries(v, ambient_dim) for v in subspace)


class EchelonBasis:
    """Incrementally built echelon basis of a subspace.

    Each stored row remembers which offered vectors (by label) it combines,
    so membership tests can also return coordinates.
    """

    def __init__(self):
        self._pivots: Dict[Hashable, Tuple[dict, dict]] = {}
        self._sorted: Optional[List[Hashable]] = None

    def __len__(self) -> int:
        return len(self._pivots)

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def pivots(self) -> List[Hashable]:
        if self._sorted is None:
            self._sorted = sorted(self._pivots)
        return self._sorted

    def add(self, vector: Mapping, label: Hashable = None) -> bool:
        """Add a vector; False when it already lies in the span."""
        vec = dict(vector)
        combo = {label: ONE} if label is not None else {}
        lead = _reduce_leading(vec, self._pivots, combo)
        if lead is None:
            return False
        inv = ONE / vec[lead]
        self._pivots[lead] = ({k: v * inv for k, v in vec.items()}, {k: v * inv for k, v in combo.items()})
        self._sorted = None
        return True

    def _full_reduce(self, vector: Mapping, track: bool):
        vec = dict(vector)
        combo: Dict[Hashable, Fraction] = {}
        for p in self.pivots():
            factor = vec.get(p)
            if not factor:
                continue
            pvec, pcombo = self._pivots[p]
            add_scaled(vec, -factor, pvec)
            if track:
                add_scaled(combo, factor, pcombo)
        return vec, combo

    def reduce(self, vector: Mapping) -> Dict[Hashable, Fraction]:
        """Normal form of ``vector`` modulo the span (zero at every pivot)."""
        return self._full_reduce(vector, track=False)[0]

    def contains(self, vector: Mapping) -> bool:
        return not self.reduce(vector)

    def express(self, vector: Mapping) -> Optional[Dict[Hashable, Fraction]]:
        """Coefficients over the offered labels, or None outside the span."""
        rest, combo = self._full_reduce(vector, track=True)
        return None if rest else combo


class QuotientSpace:
    """Q^ambient_dim modulo a subspace, with a complement basis of standard vectors."""

    def __init__(self, ambient_dim: int, subspace: Iterable[VectorLike]):
        self.ambient_dim = ambient_dim
        self._echelon = EchelonBasis()
        for v in subspace:
            self._echelon.add(_as_entries(v, ambient_dim))
        pivots = set(self._echelon.pivots())
        self.complement = [i for i in range(ambient_dim) if i not in pivots]
        self._position = {i: k for k, i in enumerate(self.complement)}

    @property
    def dimension(self) -> int:
        return len(self.complement)

    def project(self, vector: VectorLike) -> SparseVector:
        rest = self._echelon.reduce(_as_entries(vector, self.ambient_dim))
        return SparseVector(self.dimension, {self._position[i]: v for i, v in rest.items()})


def invert_dense(rows: Sequence[Sequence]) -> List[List[Fraction]]:
    """Exact inverse of a square matrix given as rows."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise LinearAlgebraError("inverse of a non-square matrix")
    echelon = EchelonBasis()
    for j in range(n):
        column = {i: to_scalar(rows[i][j]) for i in range(n) if rows[i][j]}
        if not echelon.add(column, label=j):
            raise LinearAlgebraError("singular matrix")
    inverse = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        coords = echelon.express({i: ONE})
        for j, v in coords.items():
            inverse[j][i] = v
    return inverse


def dense_rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    width = len(rows[0])
    return column_rank({i: to_scalar(rows[i][j]) for i in range(len(rows)) if rows[i][j]} for j in range(width))


# --- signs -----------------------------------------------------------------

def koszul_sign(degree_sequence_before: Sequence[int], permutation: Sequence[int]) -> Fraction:
    """Sign of reordering graded items: position a of the result holds item permutation[a].

    Every pair of odd-degree items that changes relative order contributes -1.
    """
    n = len(degree_sequence_before)
    if sorted(permutation) != list(range(n)):
        raise LinearAlgebraError(f"{list(permutation)} is not a permutation of {n} items")
    odd = [degree_sequence_before[p] % 2 for p in permutation]
    swaps = 0
    for a in range(n):
        if not odd[a]:
            continue
        pa = permutation[a]
        for b in range(a + 1, n):
            if odd[b] and permutation[b] < pa:
                swaps += 1
    return ONE if swaps % 2 == 0 else -ONE
