"""
Characteristic classes, Betti numbers and distortion-group data of smooth
complete intersections in projective space, all as exact polynomials in the
hyperplane class w truncated above w^n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, prod
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from core.cohomology_ring import CohomologyRing
from core.errors import CompleteIntersectionError, InternalConsistencyError, UnsupportedRingError
from core.exact_linear import ONE, ZERO, fstr
from core.ring_builders import build_odd_lefschetz_ring


class OmegaPoly:
    """Σ c_k w^k with arithmetic truncated above w^n."""

    def __init__(self, coefficients: Sequence, n: int):
        coefficients = [Fraction(c) for c in coefficients][:n + 1]
        self.n = n
        self.coefficients: List[Fraction] = coefficients + [ZERO] * (n + 1 - len(coefficients))

    @classmethod
    def one(cls, n: int) -> "OmegaPoly":
        return cls([ONE], n)

    def __repr__(self) -> str:
        return f"OmegaPoly({self}, n={self.n})"

    def __eq__(self, other) -> bool:
        if isinstance(other, OmegaPoly):
            return self.n == other.n and self.coefficients == other.coefficients
        if isinstance(other, (list, tuple)):
            return self.coefficients == OmegaPoly(other, self.n).coefficients
        return NotImplemented

    __hash__ = None

    def __getitem__(self, k: int) -> Fraction:
        return self.coefficients[k] if 0 <= k <= self.n else ZERO

    def __add__(self, other: "OmegaPoly") -> "OmegaPoly":
        return OmegaPoly([a + b for a, b in zip(self.coefficients, other.coefficients)], self.n)

    def __mul__(self, other: "OmegaPoly") -> "OmegaPoly":
        out = [ZERO] * (self.n + 1)
        for i, a in enumerate(self.coefficients):
            if a:
                for j in range(self.n + 1 - i):
                    out[i + j] += a * other.coefficients[j]
        return OmegaPoly(out, self.n)

    def power(self, k: int) -> "OmegaPoly":
        result = OmegaPoly.one(self.n)
        for _ in range(k):
            result = result * self
        return result

    def dual(self) -> "OmegaPoly":
        """Negate the odd coefficients."""
        return OmegaPoly([c if k % 2 == 0 else -c for k, c in enumerate(self.coefficients)], self.n)

    @classmethod
    def linear_inverse(cls, d: int, n: int) -> "OmegaPoly":
        """(1 + d w)^{-1} as a truncated geometric series."""
        return cls([Fraction(-d) ** k for k in range(n + 1)], n)

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coefficients):
            if not c:
                continue
            monomial = "" if k == 0 else ("w" if k == 1 else f"w^{k}")
            if k == 0:
                text = fstr(c)
            elif c == 1:
                text = monomial
            elif c == -1:
                text = "-" + monomial
            else:
                text = f"{fstr(c)}{monomial}"
            parts.append(text)
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class CompleteIntersection:
    ambient: int
    degrees: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(self.degrees))
        if self.ambient < 1:
            raise CompleteIntersectionError(f"ambient dimension must be positive, got {self.ambient}")
        if any(not isinstance(d, int) or d < 1 for d in self.degrees):
            raise CompleteIntersectionError(f"degrees must be positive integers, got {list(self.degrees)}")
        if self.ambient - len(self.degrees) < 1:
            raise CompleteIntersectionError(
                f"{len(self.degrees)} equations in P^{self.ambient} leave no positive-dimensional intersection")

    @property
    def dimension(self) -> int:
        return self.ambient - len(self.degrees)

    @property
    def degree(self) -> int:
        return prod(self.degrees) if self.degrees else 1

    @property
    def is_hypersurface(self) -> bool:
        return len(self.degrees) == 1

    @property
    def label(self) -> str:
        if not self.degrees:
            return f"P{self.ambient}"
        return f"X({','.join(map(str, self.degrees))})⊂P{self.ambient}"


def hypersurface(n: int, d: int) -> CompleteIntersection:
    return CompleteIntersection(n + 1, (d,))


def chern_total(ci: CompleteIntersection) -> OmegaPoly:
    """(1 + w)^{N+1} Π (1 + d_i w)^{-1} truncated at w^n."""
    n = ci.dimension
    c = OmegaPoly([comb(ci.ambient + 1, k) for k in range(n + 1)], n)
    for d in ci.degrees:
        c = c * OmegaPoly.linear_inverse(d, n)
    return c


def pontryagin_total(ci: CompleteIntersection) -> Tuple[OmegaPoly, Dict[int, int]]:
    """
    Total Pontryagin class from 1 - p1 + p2 - ... = c·c^∨, with p_k = a_k w^{2k}.

    Raises:
        InternalConsistencyError: a coefficient a_k is not an integer.
    """
    n = ci.dimension
    c = chern_total(ci)
    product = c * c.dual()
    total = [ZERO] * (n + 1)
    coefficients: Dict[int, int] = {}
    total[0] = ONE
    for k in range(1, n // 2 + 1):
        value = product[2 * k] * (-1) ** k
        if value.denominator != 1:
            raise InternalConsistencyError(f"p_{k} of {ci.label} has non-integral coefficient {value}")
        coefficients[k] = int(value)
        total[2 * k] = value
    return OmegaPoly(total, n), coefficients


def euler_characteristic(ci: CompleteIntersection) -> int:
    value = chern_total(ci)[ci.dimension] * ci.degree
    if value.denominator != 1:
        raise InternalConsistencyError(f"non-integral Euler characteristic {value}")
    return int(value)


def threefold_middle_betti_closed_form(d: int) -> int:
    return d ** 4 - 5 * d ** 3 + 10 * d ** 2 - 10 * d + 4


def middle_primitive_betti(ci: CompleteIntersection) -> int:
    """r = (-1)^n (χ - n - 1); cross-checked against the closed form for threefold hypersurfaces."""
    n = ci.dimension
    r = (-1) ** n * (euler_characteristic(ci) - n - 1)
    if n == 3 and ci.is_hypersurface and ci.ambient == 4:
        closed = threefold_middle_betti_closed_form(ci.degrees[0])
        if closed != r:
            raise InternalConsistencyError(f"middle Betti number {r} disagrees with closed form {closed}")
    return r


def betti_numbers(ci: CompleteIntersection) -> List[int]:
    n = ci.dimension
    r = middle_primitive_betti(ci)
    betti = [1 if j % 2 == 0 else 0 for j in range(2 * n + 1)]
    betti[n] = r + (1 if n % 2 == 0 else 0)
    return betti


def distortion_group_dims(ci: CompleteIntersection) -> List[Tuple[int, int]]:
    """(4k-1, b_{4k-1}) for 4k <= 2n; the indeterminacy vanishes for complete intersections."""
    betti = betti_numbers(ci)
    n = ci.dimension
    return [(4 * k - 1, betti[4 * k - 1]) for k in range(1, n // 2 + 1)]


def distortion_dimension(ci: CompleteIntersection) -> int:
    return sum(dim for _, dim in distortion_group_dims(ci))


def pontryagin_condition(ring: CohomologyRing) -> Optional[bool]:
    """
    Whether b1 = 0 and every p_k is a rational multiple of ω^{2k}.

    None when the ring carries no ω or no Pontryagin classes to decide it.
    """
    if ring.betti(1):
        return False
    if ring.omega is None or not ring.pontryagin:
        return None
    for k, p in ring.pontryagin.items():
        power = ring.power(ring.omega, 2 * k)
        if power.is_zero():
            if not p.is_zero():
                return False
            continue
        i = power.leading_index()
        if p != power * (p[i] / power[i]):
            return False
    return True


def ring_distortion_dimension(ring: CohomologyRing) -> int:
    """Σ b_{4k-1} over 4k <= real dimension."""
    return sum(ring.betti(4 * k - 1) for k in range(1, ring.real_dimension // 4 + 1))


@dataclass
class CitedStatement:
    """A value quoted from an external theorem rather than recomputed."""
    value: object
    citation: str
    note: str = "external theorem, not recomputed"


def kreck_su_report(ci: CompleteIntersection) -> CitedStatement:
    """dim H1(T_M; Q) = b3 for threefold hypersurfaces, quoted from the Kreck-Su lattice theorem."""
    if not (ci.dimension == 3 and ci.is_hypersurface):
        raise CompleteIntersectionError(f"{ci.label} is not a threefold hypersurface")
    return CitedStatement(betti_numbers(ci)[3], "torelli-abelianization (Kreck-Su)")


@dataclass
class MonodromyVerdict:
    verdict: str
    reasons: List[str] = field(default_factory=list)
    citation: str = "monodromy-infinite-index"


def monodromy_index_flag(n: int, d: int) -> MonodromyVerdict:
    if n < 3 or d < 1:
        raise CompleteIntersectionError(f"the index verdict needs n >= 3 and d >= 1, got n={n}, d={d}")
    if d <= 2:
        return MonodromyVerdict("not_applicable", [f"d={d} <= 2"])
    if n % 4 != 3:
        return MonodromyVerdict("not_determined", [f"n={n} is not 3 mod 4"])
    dim = distortion_dimension(hypersurface(n, d))
    if dim == 0:
        return MonodromyVerdict("not_applicable", ["distortion group is zero"])
    return MonodromyVerdict("infinite_index", [f"n={n} = 3 mod 4", f"d={d} >= 3", f"dim D_M = {dim} > 0"])


def ci_to_ring(ci: CompleteIntersection) -> CohomologyRing:
    """Rational cohomology ring of an odd-dimensional complete intersection."""
    n = ci.dimension
    if n % 2 == 0:
        raise UnsupportedRingError(f"even dimension {n}: the middle cup form is not modeled")
    _, coefficients = pontryagin_total(ci)
    return build_odd_lefschetz_ring(n, ci.degree, middle_primitive_betti(ci), pontryagin=coefficients,
                                    name=ci.label)


@dataclass
class CIReport:
    ci: CompleteIntersection
    chern: OmegaPoly
    pontryagin: OmegaPoly
    pontryagin_coefficients: Dict[int, int]
    euler: int
    betti: List[int]
    middle_primitive: int
    distortion: List[Tuple[int, int]]
    verdict: Optional[MonodromyVerdict] = None
    torelli_rank: Optional[CitedStatement] = None

    def record(self) -> Dict[str, object]:
        row = {
            "variety": self.ci.label,
            "n": self.ci.dimension,
            "degree": self.ci.degree,
            "chern": str(self.chern),
            "pontryagin": str(self.pontryagin),
            "euler": self.euler,
            "betti": " ".join(map(str, self.betti)),
            "r": self.middle_primitive,
            "distortion_dim": sum(dim for _, dim in self.distortion),
        }
        for k, a in sorted(self.pontryagin_coefficients.items()):
            row[f"a{k}"] = a
        if self.ci.dimension == 3 and self.ci.is_hypersurface:
            row["r_closed_form"] = threefold_middle_betti_closed_form(self.ci.degrees[0])
        if self.verdict is not None:
            row["verdict"] = self.verdict.verdict
            row["verdict_citation"] = self.verdict.citation
        if self.torelli_rank is not None:
            row["H1_torelli"] = self.torelli_rank.value
            row["H1_torelli_citation"] = self.torelli_rank.citation
        return row


def ci_report(ci: CompleteIntersection) -> CIReport:
    pontryagin, coefficients = pontryagin_total(ci)
    report = CIReport(ci, chern_total(ci), pontryagin, coefficients, euler_characteristic(ci),
                      betti_numbers(ci), middle_primitive_betti(ci), distortion_group_dims(ci))
    if ci.is_hypersurface and ci.dimension >= 3:
        report.verdict = monodromy_index_flag(ci.dimension, ci.degrees[0])
    if ci.is_hypersurface and ci.dimension == 3:
        report.torelli_rank = kreck_su_report(ci)
    return report


def hypersurface_family(n: int, d_range: Iterable[int]) -> List[CIReport]:
    return [ci_report(hypersurface(n, d)) for d in d_range]
