"""
The Adams E1 complex on the tensor algebra T(H̃(X)[1]) of a formal simply
connected space, its E2 page, loop-space homology, rational homotopy ranks and
the low-degree exact sequences.

Bigrading: a word of s letters with total homology degree t sits in E1(s, t)
and has loop degree t - s. The differential maps E1(s, t) to E1(s + 1, t).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from core.cohomology_ring import CohomologyRing, coalgebra_primitives, reduced_coproduct
from core.errors import InternalConsistencyError, ResourceLimitError, TruncationError, UnsupportedRingError
from core.exact_linear import (
    ONE, EchelonBasis, SparseMap, SparseVector, add_scaled, column_rank, koszul_sign, rank_kernel_image,
)
from utils.logger import logger

Word = Tuple[int, ...]
Bidegree = Tuple[int, int]


def _letters(ring: CohomologyRing) -> List[int]:
    letters = ring.reduced_indices()
    low = [ring.basis.name(x) for x in letters if ring.basis.degree(x) < 2]
    if low:
        raise UnsupportedRingError(f"classes of degree < 2 ({', '.join(low)}) are not supported by the Adams complex")
    return letters


def estimate_e1_size(ring: CohomologyRing, truncation: int) -> int:
    """Number of words of total homology degree <= truncation, from the Betti numbers."""
    betti = {d: ring.betti(d) for d in range(2, ring.real_dimension + 1) if ring.betti(d)}
    counts = [0] * (truncation + 1)
    counts[0] = 1
    for t in range(1, truncation + 1):
        counts[t] = sum(b * counts[t - d] for d, b in betti.items() if d <= t)
    return sum(counts)


class AdamsComplex:
    """
    E1 = T(H̃(X)[1]) truncated at total homology degree ``truncation``.

    On a letter x, ∂x = sign · Σ (-1)^{|a|} Δ_x(a, b)·ab with |a| the homology
    degree, i.e. the transpose of cup∘(J⊗1). On words ∂ is the derivation
    with Koszul signs in reduced degrees.
    """

    def __init__(self, ring: CohomologyRing, truncation: int, differential_sign: int = 1,
                 max_words: Optional[int] = None):
        if truncation < 0:
            raise TruncationError(f"truncation must be non-negative, got {truncation}")
        if differential_sign not in (1, -1):
            raise ValueError("differential_sign must be +1 or -1")
        self.ring = ring
        self.truncation = truncation
        self.differential_sign = differential_sign
        self.coalgebra = reduced_coproduct(ring)
        self.letters = tuple(_letters(ring))
        self.letter_degree = {x: ring.basis.degree(x) for x in self.letters}
        if max_words is not None:
            estimate = estimate_e1_size(ring, truncation)
            if estimate > max_words:
                logger.info(f"refusing E1 page of {ring.name} up to t={truncation}")
                raise ResourceLimitError(f"Adams E1 page up to t={truncation}", estimate, max_words)

        sign = Fraction(differential_sign)
        self._letter_differential: Dict[int, Dict[Word, Fraction]] = {}
        for x in self.letters:
            terms: Dict[Word, Fraction] = {}
            for (a, b), c in sorted(self.coalgebra.delta(x).items()):
                add_scaled(terms, sign * (-ONE if self.letter_degree[a] % 2 else ONE) * c, {(a, b): ONE})
            self._letter_differential[x] = terms

        self.components: Dict[Bidegree, List[Word]] = {(0, 0): [()]}
        for t in range(1, truncation + 1):
            for s in range(1, t // 2 + 1):
                words = []
                for x in self.letters:
                    d = self.letter_degree[x]
                    for prefix in self.components.get((s - 1, t - d), ()):
                        words.append(prefix + (x,))
                if words:
                    self.components[(s, t)] = sorted(words)
        self._index = {key: {w: i for i, w in enumerate(words)} for key, words in self.components.items()}
        self._maps: Dict[Bidegree, SparseMap] = {}
        self._ranks: Dict[Bidegree, int] = {}
        total = sum(len(w) for w in self.components.values())
        logger.increment_metric("tensor_words", total)
        logger.log(f"E1 of {ring.name} up to t={truncation}: {total} words")

    # -- bases -----------------------------------------------------------------

    def bidegrees(self) -> List[Bidegree]:
        return sorted(self.components)

    def basis(self, s: int, t: int) -> List[Word]:
        return self.components.get((s, t), [])

    def dimension(self, s: int, t: int) -> int:
        return len(self.components.get((s, t), ()))

    def word_degree(self, word: Word) -> int:
        """Reduced degree of a word: total homology degree minus length."""
        return sum(self.letter_degree[x] - 1 for x in word)

    def word_name(self, word: Word) -> str:
        if not word:
            return "1"
        return "|".join(self.ring.basis.name(x) for x in word)

    # -- differential ----------------------------------------------------------

    def letter_differential(self, x: int) -> Dict[Word, Fraction]:
        return dict(self._letter_differential[x])

    def differential_of_word(self, word: Word) -> Dict[Word, Fraction]:
        out: Dict[Word, Fraction] = {}
        shift = 0
        for i, x in enumerate(word):
            terms = self._letter_differential[x]
            if terms:
                sign = -ONE if shift % 2 else ONE
                head, tail = word[:i], word[i + 1:]
                for pair, c in terms.items():
                    add_scaled(out, sign * c, {head + pair + tail: ONE})
            shift += self.letter_degree[x] - 1
        return out

    def apply(self, vector: Mapping[Word, Fraction]) -> Dict[Word, Fraction]:
        out: Dict[Word, Fraction] = {}
        for word, c in vector.items():
            add_scaled(out, c, self.differential_of_word(word))
        return out

    def differential_columns(self, s: int, t: int) -> List[Dict[Word, Fraction]]:
        return [self.differential_of_word(w) for w in self.basis(s, t)]

    def differential(self, s: int, t: int) -> SparseMap:
        """∂: E1(s, t) -> E1(s + 1, t) in the word bases."""
        key = (s, t)
        if key not in self._maps:
            target = self._index.get((s + 1, t), {})
            columns = [{target[w]: c for w, c in col.items()} for col in self.differential_columns(s, t)]
            self._maps[key] = SparseMap(self.dimension(s, t), self.dimension(s + 1, t), columns)
        return self._maps[key]

    def differential_rank(self, s: int, t: int) -> int:
        key = (s, t)
        if key not in self._ranks:
            self._ranks[key] = column_rank(self.differential_columns(s, t)) if self.dimension(s, t) else 0
        return self._ranks[key]

    def check_d_squared(self) -> List[Bidegree]:
        """Bidegrees where ∂∘∂ fails to vanish."""
        return [(s, t) for (s, t), words in sorted(self.components.items())
                if any(self.apply(self.differential_of_word(w)) for w in words)]


def build_e1(ring: CohomologyRing, truncation: int, differential_sign: int = 1,
             max_words: Optional[int] = None, verify: bool = True) -> AdamsComplex:
    """Build E1 up to total degree ``truncation`` and confirm ∂∘∂ = 0."""
    ring.require_valid()
    if truncation < 2:
        raise TruncationError(f"Adams complex needs truncation >= 2, got {truncation}")
    complex_ = AdamsComplex(ring, truncation, differential_sign, max_words)
    if verify:
        failures = complex_.check_d_squared()
        if failures:
            raise InternalConsistencyError(f"∂∘∂ != 0 at bidegrees {failures}")
    return complex_


# --- E2 -----------------------------------------------------------------------

@dataclass
class PageTable:
    truncation: int
    dims: Dict[Bidegree, int] = field(default_factory=dict)
    representatives: Dict[Bidegree, List[Dict[Word, Fraction]]] = field(default_factory=dict)
    skipped_representatives: List[Bidegree] = field(default_factory=list)

    def dimension(self, s: int, t: int) -> int:
        return self.dims.get((s, t), 0)

    def loop_degree_sums(self) -> Dict[int, int]:
        """Σ_s dim E2(s, j + s) for every loop degree j fully covered by the truncation."""
        sums: Dict[int, int] = {}
        for j in range(self.truncation // 2 + 1):
            sums[j] = sum(self.dimension(s, j + s) for s in range(j + 1))
        return sums

    def records(self) -> List[Dict[str, int]]:
        return [{"s": s, "t": t, "loop_degree": t - s, "dim": d} for (s, t), d in sorted(self.dims.items()) if d]


def _representatives(complex_: AdamsComplex, s: int, t: int) -> List[Dict[Word, Fraction]]:
    words = complex_.basis(s, t)
    cycles = rank_kernel_image(complex_.differential(s, t)).kernel
    boundaries = EchelonBasis()
    if s >= 1:
        for col in complex_.differential_columns(s - 1, t):
            boundaries.add({complex_._index[(s, t)][w]: c for w, c in col.items()})
    chosen = []
    for z in cycles:
        if boundaries.add(z.entries()):
            chosen.append({words[i]: c for i, c in z.items()})
    return chosen


def compute_e2(complex_: AdamsComplex, representative_limit: Optional[int] = None) -> PageTable:
    """
    dim E2(s, t) = N(s, t) - rank ∂(s, t) - rank ∂(s-1, t) at every bidegree.

    Representative cycles are stored for components of size at most
    ``representative_limit`` (all of them when None).
    """
    page = PageTable(complex_.truncation)
    for s, t in complex_.bidegrees():
        n = complex_.dimension(s, t)
        incoming = complex_.differential_rank(s - 1, t) if s >= 1 else 0
        dim = n - complex_.differential_rank(s, t) - incoming
        page.dims[(s, t)] = dim
        if not dim:
            continue
        if representative_limit is None or n <= representative_limit:
            page.representatives[(s, t)] = _representatives(complex_, s, t)
        else:
            page.skipped_representatives.append((s, t))
    return page


def loop_homology_ranks(ring: CohomologyRing, truncation: int, max_words: Optional[int] = None) -> List[int]:
    """dim H_j(ΩX; Q) for 0 <= j <= truncation (formality assumed)."""
    complex_ = build_e1(ring, max(2 * truncation, 2), max_words=max_words, verify=False)
    page = compute_e2(complex_, representative_limit=0)
    sums = page.loop_degree_sums()
    return [sums[j] for j in range(truncation + 1)]


# --- homotopy -------------------------------------------------------------------

def reduced_shuffle(word: Word, reduced_degrees: Sequence[int]) -> Dict[tuple, Fraction]:
    """Reduced shuffle coproduct of a word, keyed ("c", left, right), Koszul signs in reduced degrees."""
    out: Dict[tuple, Fraction] = {}
    s = len(word)
    for size in range(1, s):
        for left in combinations(range(s), size):
            right = tuple(i for i in range(s) if i not in left)
            sign = koszul_sign(reduced_degrees, list(left) + list(right))
            key = ("c", tuple(word[i] for i in left), tuple(word[i] for i in right))
            add_scaled(out, sign, {key: ONE})
    return out


@dataclass
class HomotopyRanks:
    truncation: int
    ranks: Dict[int, int] = field(default_factory=dict)
    graded: Dict[int, Dict[int, int]] = field(default_factory=dict)

    def records(self) -> List[Dict[str, int]]:
        rows = []
        for j, total in sorted(self.ranks.items()):
            row = {"degree": j, "rank": total}
            for s, d in sorted(self.graded.get(j, {}).items()):
                row[f"Gr{s}"] = d
            rows.append(row)
        return rows


def _gr_pi(complex_: AdamsComplex, s: int, t: int) -> int:
    """Adams-graded piece Gr^s π_{t-s+1} = dim(Z∩P) - dim(B∩P) at E1(s, t)."""
    words = complex_.basis(s, t)
    if not words:
        return 0

    def shuffle(word):
        return reduced_shuffle(word, [complex_.letter_degree[x] - 1 for x in word])

    stacked = []
    for w in words:
        col = {("d",) + (v,): c for v, c in complex_.differential_of_word(w).items()}
        col.update(shuffle(w))
        stacked.append(col)
    cycles_primitive = len(words) - column_rank(stacked)

    boundary_rank = complex_.differential_rank(s - 1, t) if s >= 2 else 0
    shuffled_boundaries = 0
    if boundary_rank:
        columns = []
        for col in complex_.differential_columns(s - 1, t):
            image: Dict[tuple, Fraction] = {}
            for v, c in col.items():
                add_scaled(image, c, shuffle(v))
            columns.append(image)
        shuffled_boundaries = column_rank(columns)
    return cycles_primitive - (boundary_rank - shuffled_boundaries)


def homotopy_ranks(ring: CohomologyRing, truncation: int, max_words: Optional[int] = None) -> HomotopyRanks:
    """dim π_j(X)⊗Q for 2 <= j <= truncation, refined by Adams filtration s."""
    if truncation < 2:
        raise TruncationError(f"homotopy ranks need truncation >= 2, got {truncation}")
    complex_ = build_e1(ring, 2 * (truncation - 1), max_words=max_words, verify=False)
    result = HomotopyRanks(truncation)
    for j in range(1, truncation):
        graded = {}
        for s in range(1, j + 1):
            d = _gr_pi(complex_, s, j + s)
            if d < 0:
                raise InternalConsistencyError(f"negative primitive dimension at s={s}, j={j}")
            if d:
                graded[s] = d
        result.graded[j + 1] = graded
        result.ranks[j + 1] = sum(graded.values())
    return result


# --- Milnor-Moore -----------------------------------------------------------------

def _multiply_series(a: List[int], b: List[int], order: int) -> List[int]:
    out = [0] * (order + 1)
    for i, x in enumerate(a[:order + 1]):
        if x:
            for j, y in enumerate(b[:order + 1 - i]):
                out[i + j] += x * y
    return out


def _factor(k: int, multiplicity: int, order: int) -> List[int]:
    """(1 - t^k)^{-m} for even k, (1 + t^k)^m for odd k."""
    series = [1] + [0] * order
    if k % 2:
        base = [0] * (order + 1)
        base[0] = 1
        if k <= order:
            base[k] = 1
        for _ in range(multiplicity):
            series = _multiply_series(series, base, order)
    else:
        geometric = [1 if i % k == 0 else 0 for i in range(order + 1)]
        for _ in range(multiplicity):
            series = _multiply_series(series, geometric, order)
    return series


def milnor_moore_series(pi_hat: Mapping[int, int], order: int) -> List[int]:
    """Loop homology Poincare series up to t^order from π̂_k = dim π_{k+1}(X)⊗Q."""
    series = [1] + [0] * order
    for k, m in sorted(pi_hat.items()):
        if 1 <= k <= order and m:
            series = _multiply_series(series, _factor(k, m, order), order)
    return series


def homotopy_from_loop_ranks(loop_ranks: Sequence[int]) -> Dict[int, int]:
    """Invert the Milnor-Moore product: loop ranks H_0..H_J give π_2..π_{J+1}."""
    order = len(loop_ranks) - 1
    pi_hat: Dict[int, int] = {}
    for k in range(1, order + 1):
        current = milnor_moore_series(pi_hat, order)
        pi_hat[k] = loop_ranks[k] - current[k]
    return {k + 1: m for k, m in pi_hat.items()}


# --- exact sequences ---------------------------------------------------------------

@dataclass
class PiSequenceReport:
    """
    A short exact sequence 0 -> kernel -> middle -> cokernel -> 0 where the
    outer terms come from Δ and primitives and the middle from the Adams page.
    """
    sequence: str
    kernel: int
    middle: int
    cokernel: int
    details: Dict[str, int] = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.middle == self.kernel + self.cokernel

    def record(self) -> Dict[str, object]:
        return {"sequence": self.sequence, "kernel": self.kernel, "middle": self.middle,
                "cokernel": self.cokernel, "exact": self.exact, **self.details}


def _delta_rank(ring: CohomologyRing, source_degree: int, left: int, right: int) -> int:
    coalgebra = reduced_coproduct(ring)
    columns = []
    for x in coalgebra.in_degree(source_degree):
        columns.append({pair: c for pair, c in coalgebra.delta(x).items()
                        if ring.basis.degree(pair[0]) == left and ring.basis.degree(pair[1]) == right})
    return column_rank(columns)


def pi3_sequence(ring: CohomologyRing, max_words: Optional[int] = None) -> Tuple[PiSequenceReport, PiSequenceReport]:
    """
    0 -> Sym²H₂/imΔ -> π₃⊗Q -> H₃ -> 0 and its loop-space companion
    0 -> H₂⊗H₂/imΔ -> H₂(ΩX) -> H₃ -> 0.

    The middle terms are read from homotopy_ranks and loop_homology_ranks.
    """
    ring.require_valid()
    b2, b3 = ring.betti(2), ring.betti(3)
    rank = _delta_rank(ring, 4, 2, 2)
    sym2 = b2 * (b2 + 1) // 2
    pi3 = homotopy_ranks(ring, 3, max_words=max_words).ranks[3]
    h2_loop = loop_homology_ranks(ring, 2, max_words=max_words)[2]
    homotopy = PiSequenceReport("pi3", sym2 - rank, pi3, b3, {"sym2_dim": sym2, "delta_rank": rank})
    loop = PiSequenceReport("H2_loop", b2 * b2 - rank, h2_loop, b3, {"tensor_dim": b2 * b2, "delta_rank": rank})
    for report in (homotopy, loop):
        if not report.exact:
            logger.fail(f"{report.sequence} sequence of {ring.name} is not exact: "
                        f"{report.kernel} + {report.cokernel} != {report.middle}")
    return homotopy, loop


def pi4_kernel_dim(ring: CohomologyRing) -> Tuple[int, int]:
    """(dim (H₂⊗H₃)/imΔ, rank Δ) for rings with b₂ = 1."""
    b2, b3 = ring.betti(2), ring.betti(3)
    if b2 != 1:
        raise UnsupportedRingError(f"the π4 sequence needs b2 = 1, got b2 = {b2}")
    rank = _delta_rank(ring, 5, 2, 3)
    return b2 * b3 - rank, rank


def pi4_sequence_b2_1(ring: CohomologyRing, max_words: Optional[int] = None) -> PiSequenceReport:
    """0 -> (H₂⊗H₃)/imΔ -> π₄⊗Q -> PH₄ -> 0, for rings with b₂ = 1."""
    ring.require_valid()
    kernel, rank = pi4_kernel_dim(ring)
    primitives = len(coalgebra_primitives(ring, 4))
    pi4 = homotopy_ranks(ring, 4, max_words=max_words).ranks[4]
    report = PiSequenceReport("pi4", kernel, pi4, primitives,
                              {"tensor_dim": ring.betti(3), "delta_rank": rank, "primitive_H4": primitives})
    if not report.exact:
        logger.fail(f"pi4 sequence of {ring.name} is not exact: {kernel} + {primitives} != {pi4}")
    return report
