"""
Builders for the ring families used throughout the toolkit: projective spaces,
spheres, exterior algebras, Kunneth products, formal six-manifolds and rings
with the Lefschetz shape of an odd-dimensional hypersurface.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from math import comb
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from core.cohomology_ring import CohomologyRing
from core.errors import DegenerateCubicError, RingFormatError, UnsupportedRingError
from core.exact_linear import (
    ONE, ZERO, EchelonBasis, GradedBasis, add_scaled, fstr, kernel_combinations, koszul_sign, to_scalar,
)

CubicForm = Dict[Tuple[int, int, int], Fraction]


def power_name(k: int, symbol: str = "w") -> str:
    if k == 0:
        return "1"
    return symbol if k == 1 else f"{symbol}^{k}"


def build_projective_space(m: int) -> CohomologyRing:
    """Q[w]/w^(m+1) with ∫w^m = 1 and p(P^m) = (1 + w^2)^(m+1)."""
    if m < 1:
        raise UnsupportedRingError(f"projective space needs m >= 1, got {m}")
    basis = GradedBasis((power_name(k), 2 * k) for k in range(m + 1))
    products = {(power_name(i), power_name(j)): {power_name(i + j): 1}
                for i in range(1, m + 1) for j in range(i, m + 1 - i)}
    pontryagin = {k: {power_name(2 * k): comb(m + 1, k)} for k in range(1, m // 2 + 1)}
    return CohomologyRing(2 * m, basis, products, {power_name(m): 1},
                          omega={"w": 1}, pontryagin=pontryagin, name=f"P{m}")


def build_sphere(k: int) -> CohomologyRing:
    if k < 1:
        raise UnsupportedRingError(f"sphere needs k >= 1, got {k}")
    basis = GradedBasis([("1", 0), ("s", k)])
    return CohomologyRing(k, basis, {}, {"s": 1}, simply_connected=k >= 2, name=f"S{k}")


def build_exterior_algebra(degrees: Sequence[int], names: Optional[Sequence[str]] = None) -> CohomologyRing:
    """Exterior algebra on odd generators; monomials are named ``y1*y3`` in generator order."""
    if any(d < 1 or d % 2 == 0 for d in degrees):
        raise UnsupportedRingError(f"exterior generators must have odd positive degree, got {list(degrees)}")
    names = list(names) if names is not None else [f"y{d}" for d in degrees]
    r = len(degrees)
    subsets = [s for size in range(r + 1) for s in combinations(range(r), size)]
    subsets.sort(key=lambda s: (sum(degrees[i] for i in s), s))

    def label(s):
        return "*".join(names[i] for i in s) if s else "1"

    basis = GradedBasis((label(s), sum(degrees[i] for i in s)) for s in subsets)
    products = {}
    for s in subsets[1:]:
        for t in subsets[1:]:
            if set(s) & set(t):
                continue
            joined = list(s) + list(t)
            order = sorted(range(len(joined)), key=lambda a: joined[a])
            sign = koszul_sign([degrees[i] for i in joined], order)
            products[(label(s), label(t))] = {label(tuple(sorted(joined))): sign}
    top = tuple(range(r))
    return CohomologyRing(sum(degrees), basis, products, {label(top): 1},
                          simply_connected=False, name="exterior(" + ",".join(names) + ")")


def _factor_name(tag: str, name: str) -> str:
    return f"{tag}.{name}"


def build_product(a: CohomologyRing, b: CohomologyRing, name: Optional[str] = None) -> CohomologyRing:
    """
    Kunneth product with (x⊗y)(x'⊗y') = (-1)^{|y||x'|} xx'⊗yy'.

    Factor classes are named ``a.<name>`` and ``b.<name>``, mixed classes
    ``a.<name>*b.<name>``. ∫ is multiplicative and ω is the sum of the two
    Kahler classes when both factors carry one. Pontryagin classes multiply;
    a factor without them contributes p = 1.
    """
    a.require_valid()
    b.require_valid()
    ua, ub = a.unit_index, b.unit_index
    pairs = [(i, j) for i in range(len(a)) for j in range(len(b))]
    pairs.sort(key=lambda p: (a.basis.degree(p[0]) + b.basis.degree(p[1]), p[0] != ua, p))

    def label(i, j):
        if i == ua and j == ub:
            return "1"
        if j == ub:
            return _factor_name("a", a.basis.name(i))
        if i == ua:
            return _factor_name("b", b.basis.name(j))
        return f"{_factor_name('a', a.basis.name(i))}*{_factor_name('b', b.basis.name(j))}"

    position = {p: k for k, p in enumerate(pairs)}
    basis = GradedBasis((label(i, j), a.basis.degree(i) + b.basis.degree(j)) for i, j in pairs)

    def tensor_product(x: Mapping[Tuple[int, int], Fraction], y: Mapping[Tuple[int, int], Fraction]):
        out: Dict[int, Fraction] = {}
        for (i, j), c in x.items():
            for (k, l), d in y.items():
                left = a.product_entries(i, k)
                right = b.product_entries(j, l)
                if not left or not right:
                    continue
                sign = -ONE if (b.basis.degree(j) * a.basis.degree(k)) % 2 else ONE
                for p, u in left.items():
                    for q, v in right.items():
                        add_scaled(out, sign * c * d * u * v, {position[(p, q)]: ONE})
        return out

    products = {}
    for s, (i, j) in enumerate(pairs):
        for t, (k, l) in enumerate(pairs):
            if s == 0 or t == 0:
                continue
            result = tensor_product({(i, j): ONE}, {(k, l): ONE})
            if result:
                products[(s, t)] = result
    integration = {position[(i, j)]: x * y for i, x in a.integration.items() for j, y in b.integration.items()}

    omega = None
    if a.omega is not None and b.omega is not None:
        omega = {position[(i, ub)]: c for i, c in a.omega.items()}
        for j, c in b.omega.items():
            omega[position[(ua, j)]] = c

    def total_pontryagin(ring, unit):
        total = {0: {unit: ONE}}
        for k, p in ring.pontryagin.items():
            total[k] = p.entries()
        return total

    pontryagin = {}
    if a.pontryagin or b.pontryagin:
        pa, pb = total_pontryagin(a, ua), total_pontryagin(b, ub)
        for i, x in pa.items():
            for j, y in pb.items():
                k = i + j
                if k == 0:
                    continue
                term = {(p, q): u * v for p, u in x.items() for q, v in y.items()}
                acc = pontryagin.setdefault(k, {})
                for pair, c in term.items():
                    add_scaled(acc, c, {position[pair]: ONE})
        pontryagin = {k: v for k, v in pontryagin.items() if v}

    return CohomologyRing(a.real_dimension + b.real_dimension, basis, products, integration,
                          omega=omega, pontryagin=pontryagin,
                          simply_connected=a.simply_connected and b.simply_connected,
                          name=name or f"{a.name}x{b.name}")


# --- six-manifolds ------------------------------------------------------------

def symmetric_cubic(entries: Mapping[Tuple[int, int, int], object], b2: int) -> CubicForm:
    """Fill a cubic form on H^2 (indices 1..b2) from any one ordering of each entry.

    Repeated entries for the same unordered triple must agree.
    """
    cubic: CubicForm = {}
    given: Dict[Tuple[int, int, int], Fraction] = {}
    for key, value in entries.items():
        if len(key) != 3 or any(not 1 <= i <= b2 for i in key):
            raise RingFormatError(f"cubic index {key} outside 1..{b2}")
        value = to_scalar(value)
        sorted_key = tuple(sorted(key))
        if sorted_key in given and given[sorted_key] != value:
            raise RingFormatError(f"cubic form is not symmetric at {sorted_key}")
        given[sorted_key] = value
    for key, value in given.items():
        if value:
            for perm in set(permutations(key)):
                cubic[perm] = value
    return cubic


def diagonal_cubic(b2: int) -> CubicForm:
    return {(i, i, i): ONE for i in range(1, b2 + 1)}


def cubic_kernel(cubic: CubicForm, b2: int) -> List[List[Fraction]]:
    """Vectors u in H^2 with c(u, ., .) identically zero."""
    columns = []
    for i in range(1, b2 + 1):
        columns.append({(j, k): cubic[(i, j, k)] for j in range(1, b2 + 1) for k in range(1, b2 + 1)
                        if cubic.get((i, j, k))})
    return [[combo.get(i, ZERO) for i in range(b2)] for combo in kernel_combinations(columns)]


def six_manifold_names(b2: int, b3: int) -> List[Tuple[str, int]]:
    m = b3 // 2
    return ([("1", 0)] + [(f"a{i}", 2) for i in range(1, b2 + 1)]
            + [(f"z{k}", 3) for k in range(1, m + 1)] + [(f"z-{k}", 3) for k in range(1, m + 1)])


def build_six_manifold(b2: int, b3: int, cubic: Mapping[Tuple[int, int, int], object],
                       omega_index: Optional[int] = 1, omega: Optional[Sequence[object]] = None,
                       check: bool = True, name: Optional[str] = None) -> CohomologyRing:
    """
    Formal simply connected six-manifold ring from (b2, b3, cubic form).

    H^2 has basis a1..a_b2, H^3 the hyperbolic basis z1..zm, z-1..z-m with
    z_k z_{-k} = vol, and H^4 is the image of H^2·H^2 in (H^2)^∨ with basis
    f1.. (the dual basis of H^2 when the cubic is nondegenerate). Cubic indices
    are 1-based. ``omega`` overrides ``omega_index`` with a full coefficient vector.

    Raises:
        DegenerateCubicError: some u has c(u, ., .) = 0 and ``check`` is set.
    """
    if b2 < 1 or b3 < 0 or b3 % 2:
        raise UnsupportedRingError(f"six-manifold needs b2 >= 1 and even b3 >= 0, got b2={b2}, b3={b3}")
    cubic = symmetric_cubic(cubic, b2)
    kernel = cubic_kernel(cubic, b2)
    if kernel and check:
        raise DegenerateCubicError([fstr(x) for x in kernel[0]])

    # H^4 basis: pivot vectors among the contractions c(i, j, .)
    echelon = EchelonBasis()
    image_basis: List[Dict[int, Fraction]] = []
    for i in range(1, b2 + 1):
        for j in range(i, b2 + 1):
            vec = {m: cubic[(i, j, m)] for m in range(1, b2 + 1) if cubic.get((i, j, m))}
            if vec and echelon.add(vec, label=len(image_basis)):
                image_basis.append(vec)
    if not kernel:
        image_basis = [{m: ONE} for m in range(1, b2 + 1)]
        echelon = EchelonBasis()
        for label, vec in enumerate(image_basis):
            echelon.add(vec, label=label)
    r = len(image_basis)

    entries = six_manifold_names(b2, b3) + [(f"f{l}", 4) for l in range(1, r + 1)] + [("vol", 6)]
    basis = GradedBasis(entries)
    products: Dict[Tuple[str, str], Dict[str, Fraction]] = {}
    for i in range(1, b2 + 1):
        for j in range(i, b2 + 1):
            vec = {m: cubic[(i, j, m)] for m in range(1, b2 + 1) if cubic.get((i, j, m))}
            if vec:
                coords = echelon.express(vec)
                products[(f"a{i}", f"a{j}")] = {f"f{l + 1}": c for l, c in coords.items()}
        for l, g in enumerate(image_basis, start=1):
            if g.get(i):
                products[(f"a{i}", f"f{l}")] = {"vol": g[i]}
    for k in range(1, b3 // 2 + 1):
        products[(f"z{k}", f"z-{k}")] = {"vol": ONE}

    if omega is not None:
        if len(omega) != b2:
            raise RingFormatError(f"omega has {len(omega)} coefficients, expected {b2}")
        omega_map = {f"a{i + 1}": to_scalar(c) for i, c in enumerate(omega) if to_scalar(c)}
    elif omega_index is not None:
        if not 1 <= omega_index <= b2:
            raise RingFormatError(f"omega_index {omega_index} outside 1..{b2}")
        omega_map = {f"a{omega_index}": ONE}
    else:
        omega_map = None
    return CohomologyRing(6, basis, products, {"vol": ONE}, omega=omega_map or None,
                          name=name or f"sixfold(b2={b2},b3={b3})")


def build_odd_lefschetz_ring(n: int, degree: int, middle_rank: int,
                             pontryagin: Optional[Mapping[int, object]] = None,
                             name: Optional[str] = None) -> CohomologyRing:
    """
    Ring of an odd complex dimension n manifold with the Lefschetz shape of a
    hypersurface: powers of w with ∫w^n = degree, plus a symplectic middle
    block z1..zm, z-1..z-m in degree n with z_k z_{-k} = w^n/degree and w·H^n = 0.
    ``pontryagin`` maps k to the coefficient of w^{2k}.
    """
    if n % 2 == 0:
        raise UnsupportedRingError(f"middle cup form of even dimension {n} is not modeled")
    if middle_rank % 2:
        raise UnsupportedRingError(f"odd middle Betti number {middle_rank} in odd degree {n}")
    if degree < 1:
        raise UnsupportedRingError(f"degree must be positive, got {degree}")
    m = middle_rank // 2
    top = power_name(n)
    entries = [(power_name(k), 2 * k) for k in range(n + 1)]
    entries += [(f"z{k}", n) for k in range(1, m + 1)] + [(f"z-{k}", n) for k in range(1, m + 1)]
    entries.sort(key=lambda e: e[1])
    basis = GradedBasis(entries)
    products: Dict[Tuple[str, str], Dict[str, Fraction]] = {
        (power_name(i), power_name(j)): {power_name(i + j): ONE}
        for i in range(1, n + 1) for j in range(i, n + 1 - i)}
    for k in range(1, m + 1):
        products[(f"z{k}", f"z-{k}")] = {top: Fraction(1, degree)}
    classes = {k: {power_name(2 * k): c} for k, c in sorted((pontryagin or {}).items())
               if 2 * k <= n and to_scalar(c)}
    return CohomologyRing(2 * n, basis, products, {top: degree}, omega={"w": 1},
                          pontryagin=classes, simply_connected=n > 1,
                          name=name or f"lefschetz(n={n},deg={degree},b_mid={middle_rank})")
