import sys
import json
import argparse
from typing import Dict, List, Optional, Tuple

from dotenv import load_dotenv

from core.adams_loop import (
    build_e1, compute_e2, homotopy_from_loop_ranks, homotopy_ranks, loop_homology_ranks, pi3_sequence,
    pi4_sequence_b2_1,
)
from core.char_class import (
    CompleteIntersection, ci_report, ci_to_ring, hypersurface, pontryagin_condition, ring_distortion_dimension,
)
from core.cohomology_ring import CohomologyRing, validate_ring
from core.corpus import RingCorpus
from core.derivations import (
    SixfoldCoefficients, check_chain_derivation, exp_derivation, johnson_invariant, johnson_surjectivity_witness,
    johnson_target, johnson_target_dim, pi4_johnson_target_dim, sixfold_derivation,
)
from core.errors import AlgebraError, RingFormatError, ResourceLimitError
from core.exact_linear import column_rank, fstr
from core.lefschetz_sl2 import (
    build_sl2, derivation_algebra, hard_lefschetz_check, polarization_on_primitives, preserves_primitives,
    restriction_injectivity, sl2_commutant_check, trace_form,
)
from core.lie_model import dump_model, lie_homology, quadratic_model_from_ring, sixfold_model
from core.output_manager import OutputManager, Report
from core.resource_guard import ResourceGuard
from core.ring_builders import diagonal_cubic
from core.ring_io import load_ring
from utils.logger import logger

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    """Flag combinations argparse cannot express."""
    pass


def _int_range(text: str) -> List[int]:
    """'5' -> [5], '1..10' -> [1, ..., 10]."""
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            low, high = int(low), int(high)
            if low > high:
                raise UsageError(f"empty range {text!r}")
            return list(range(low, high + 1))
        return [int(text)]
    except ValueError:
        raise UsageError(f"expected an integer or a range a..b, got {text!r}") from None


def _read_json(path: str, location: str):
    try:
        with open(path, "r") as f:
            return json.load(f)
    except OSError as exc:
        raise RingFormatError(f"cannot read file ({exc.strerror})", path) from None
    except json.JSONDecodeError as exc:
        raise RingFormatError(f"invalid JSON ({exc.msg})", f"{location} line {exc.lineno}") from None


def _index_table(path: str, width: int, location: str) -> Dict[Tuple[int, ...], str]:
    """JSON list of [i1, .., i_width, value] rows, or of {"index": [...], "value": v} objects."""
    document = _read_json(path, location)
    if not isinstance(document, list):
        raise RingFormatError("expected a list of entries", location)
    table = {}
    for n, entry in enumerate(document):
        if isinstance(entry, dict):
            entry = list(entry.get("index", [])) + [entry.get("value")]
        if not isinstance(entry, list) or len(entry) != width + 1:
            raise RingFormatError(f"expected {width} indices and a value", f"{location}[{n}]")
        try:
            key = tuple(int(x) for x in entry[:width])
        except (TypeError, ValueError):
            raise RingFormatError("indices must be integers", f"{location}[{n}]") from None
        if isinstance(entry[width], float):
            raise RingFormatError("coefficients must be exact (integers or 'p/q' strings)", f"{location}[{n}]")
        table[key] = entry[width]
    return table


def _load_input(args, validate: bool = True) -> CohomologyRing:
    if getattr(args, "ring", None):
        return load_ring(args.ring, validate=validate)
    if getattr(args, "hypersurface", None):
        n, d = args.hypersurface
        return ci_to_ring(hypersurface(n, d))
    overrides = {"b2": getattr(args, "b2", None), "b3": getattr(args, "b3", None)}
    ring = RingCorpus().build(args.builtin, **overrides)
    if validate:
        ring.require_valid()
    return ring


def _report(command: str, argv: List[str], guard: ResourceGuard, ring: Optional[CohomologyRing] = None) -> Report:
    return Report(command, list(argv), guard.report_version, ring.summary() if ring is not None else None)


# --- commands ------------------------------------------------------------------------------

def cmd_validate(args, argv, guard: ResourceGuard) -> Tuple[Report, int]:
    ring = _load_input(args, validate=False)
    validation = validate_ring(ring)
    report = _report("validate", argv, guard, ring)
    report.add_table("violations", [
        {"invariant": v.invariant, "detail": v.detail, "witness": "" if v.witness is None else str(v.witness)}
        for v in validation.violations])
    if validation.notes:
        report.add_table("notes", [{"note": k, "value": v} for k, v in sorted(validation.notes.items())])
    report.cite("ring invariants hold", validation.is_valid, "ring-axioms")
    if validation.is_valid:
        logger.success(f"{ring.name} is a valid ring")
        return report, EXIT_OK
    logger.fail(f"{ring.name} violates: {', '.join(validation.names())}")
    return report, EXIT_VIOLATION


def cmd_homotopy(args, argv, guard: ResourceGuard) -> Tuple[Report, int]:
    ring = _load_input(args)
    truncation = args.max_degree or ring.real_dimension + guard.default_truncation_padding
    report = _report("homotopy", argv, guard, ring)
    if not args.formal:
        # without formality only the E2 page of the cochain-level complex is meaningful
        guard.check_tensor_budget(ring, truncation, "E1 page")
        complex_ = build_e1(ring, truncation, max_words=guard.max_basis_words)
        page = compute_e2(complex_, representative_limit=guard.representative_limit)
        report.add_table("e2_page", page.records())
        report.cite("formality asserted", False, "formality (compact Kahler)")
        return report, EXIT_OK

    guard.check_tensor_budget(ring, truncation, "loop homology", per_degree=2)
    ranks = homotopy_ranks(ring, truncation, max_words=guard.max_basis_words)
    loops = loop_homology_ranks(ring, truncation, max_words=guard.max_basis_words)
    milnor_moore = homotopy_from_loop_ranks(loops)
    rows = []
    for record in ranks.records():
        record["milnor_moore"] = milnor_moore.get(record["degree"], "")
        rows.append(record)
    report.add_table("homotopy", rows)
    report.add_table("loop_homology", [{"degree": j, "rank": r} for j, r in enumerate(loops)])

    sequences = list(pi3_sequence(ring, max_words=guard.max_basis_words))
    if ring.betti(2) == 1:
        sequences.append(pi4_sequence_b2_1(ring, max_words=guard.max_basis_words))
    report.add_table("sequences", [s.record() for s in sequences])
    exact = all(s.exact for s in sequences)

    agree = all(milnor_moore.get(j) == r for j, r in ranks.ranks.items() if j in milnor_moore)
    report.cite("formality asserted", True, "formality (compact Kahler)")
    report.cite("E2 primitives give π ranks", True, "adams-spectral-sequence")
    report.cite("loop homology inverts to the same π ranks", agree, "milnor-moore")
    report.cite("low-degree sequences are exact", exact, "adams-spectral-sequence")
    if args.emit_model:
        report.extras["model"] = dump_model(quadratic_model_from_ring(ring, truncation=truncation + 1))
    return report, EXIT_OK if agree and exact else EXIT_VIOLATION


def cmd_johnson(args, argv, guard: ResourceGuard) -> Tuple[Report, int]:
    ring = _load_input(args)
    report = _report("johnson", argv, guard, ring)
    target, bound = johnson_target_dim(ring)
    condition = pontryagin_condition(ring)
    distortion = ring_distortion_dimension(ring) if condition else "not_determined"
    rows = [
        {"invariant": "johnson_target_dim", "value": target},
        {"invariant": "closed_form_bound", "value": bound},
        {"invariant": "pontryagin_condition", "value": "not_determined" if condition is None else condition},
        {"invariant": "distortion_dim", "value": distortion},
    ]
    if ring.betti(2) == 1:
        rows.append({"invariant": "pi4_johnson_target_dim", "value": pi4_johnson_target_dim(ring)})
    report.add_table("johnson", rows)
    report.cite("dim Hom(H3, Sym2 H2 / im Δ) is a quotient of H1(ho T_M)", target, "johnson-surjection")
    report.cite("rank H1(ho T_M) >= b3·C(b2+1,2) - b2·b3", bound, "torelli-rank-bound")
    if condition:
        report.cite("dim D_M (central in T_M)", distortion, "distortion-group")
    else:
        logger.info(f"{ring.name}: b1 = 0 with p_k proportional to ω^2k not established; D_M not determined")
        report.cite("dim D_M needs b1 = 0 and p_k ∈ Q·ω^2k", distortion, "distortion-group")
    if condition and ring.betti(2) == 1:
        report.cite("H1(T_M; Q) ≅ D_M", distortion, "torelli-abelianization (Kreck-Su)")
    else:
        report.cite("rank H1(T_M; Q) lower bound", target, "johnson-surjection")
    return report, EXIT_OK


def _complete_intersections(args) -> List[CompleteIntersection]:
    if args.ambient is not None:
        if args.range:
            raise UsageError("--range applies to --hypersurface only")
        degrees = [int(d) for d in args.degrees.split(",") if d.strip()] if args.degrees else []
        return [CompleteIntersection(args.ambient, tuple(degrees))]
    values = args.hypersurface
    if len(values) not in (1, 2):
        raise UsageError("--hypersurface takes N and D (D may be a range a..b)")
    n = _int_range(values[0])
    if len(n) != 1:
        raise UsageError("the dimension N must be a single integer")
    if len(values) == 2 and args.range:
        raise UsageError("give the degree either as D or with --range, not both")
    if len(values) == 1 and not args.range:
        raise UsageError("--hypersurface N needs a degree D or --range a..b")
    degrees = _int_range(values[1] if len(values) == 2 else args.range)
    return [hypersurface(n[0], d) for d in degrees]


def cmd_charclass(args, argv, guard: ResourceGuard) -> Tuple[Report, int]:
    cis = _complete_intersections(args)
    report = _report("charclass", argv, guard)
    reports = [ci_report(ci) for ci in cis]
    report.add_table("complete_intersections", [r.record() for r in reports])
    for r in reports:
        if r.verdict is not None:
            report.cite(f"{r.ci.label}: monodromy index", r.verdict.verdict, r.verdict.citation)
        if r.torelli_rank is not None:
            report.cite(f"{r.ci.label}: dim H1(T_M; Q)", r.torelli_rank.value, r.torelli_rank.citation)
    return report, EXIT_OK


def cmd_sixfold(args, argv, guard: ResourceGuard) -> Tuple[Report, int]:
    b2, b3 = args.b2, args.b3
    cubic = _index_table(args.cubic, 3, "--cubic") if args.cubic else diagonal_cubic(b2)
    a_table = _index_table(args.a, 3, "--a") if args.a else {}
    model = sixfold_model(b2, b3, cubic)
    report = _report("sixfold", argv, guard)
    report.ring = {"b2": b2, "b3": b3, "model": model.name}

    coefficients = SixfoldCoefficients(b2, b3, a_table)
    report.add_table("b_coefficients", [
        {"f": f"f{j}", "bracket": f"[e{i},z{k}]", "value": value} for (j, i, k), value in coefficients.b().items()])
    D = sixfold_derivation(model, coefficients)
    failures = check_chain_derivation(model, D)
    phi = exp_derivation(model, D)
    invariant = johnson_invariant(model, phi)
    target = johnson_target(model)
    report.add_table("johnson_matrix", invariant.records())
    report.add_table("lie_homology", [{"lie_degree": j, "pi_degree": j + 1, "rank": r}
                                      for j, r in sorted(lie_homology(model, range(1, 4)).items())])
    report.cite("[D, ∂] = 0", not failures, "derivation-lemma")
    report.cite("exp D commutes with ∂", not phi.commutes_with_differential(), "derivation-lemma")
    report.cite("Johnson invariant vanishes", invariant.is_zero(), "johnson-surjection")
    report.cite("dim Sym2 H2 / im Δ", target.dimension, "johnson-surjection")

    if args.witness_surjectivity:
        entries = johnson_surjectivity_witness(model)
        rows, vectors = [], []
        for entry in entries:
            column = entry.invariant.column(entry.z_name)
            rows.append({"z": entry.z_name, "monomial": f"e{entry.monomial[0]}e{entry.monomial[1]}",
                         "column": " ".join(fstr(x) for x in column)})
            vectors.append({(r, j): x for r, row in enumerate(entry.invariant.matrix)
                            for j, x in enumerate(row) if x})
        report.add_table("surjectivity_witness", rows)
        spanned = column_rank(vectors)
        report.cite("witnesses span Hom(H3, Sym2 H2 / im Δ)",
                    spanned == b3 * target.dimension, "johnson-surjection")
    if args.emit_model:
        report.extras["model"] = dump_model(model)
    return report, EXIT_OK if not failures else EXIT_VIOLATION


def cmd_lefschetz(args, argv, guard: ResourceGuard) -> Tuple[Report, int]:
    ring = _load_input(args)
    report = _report("lefschetz", argv, guard, ring)
    verdicts = hard_lefschetz_check(ring)
    report.add_table("hard_lefschetz", [{"j": j, "isomorphism": ok} for j, ok in sorted(verdicts.items())])
    report.cite("hard Lefschetz", all(verdicts.values()), "hard-lefschetz")
    if not all(verdicts.values()):
        logger.fail(f"hard Lefschetz fails for {ring.name}")
        return report, EXIT_VIOLATION

    sl2 = build_sl2(ring)
    decomposition = sl2.decomposition
    identity = decomposition.dimension_identity()
    report.add_table("primitives", [
        {"degree": m, "betti": ring.betti(m), "primitive_dim": dim, "betti_difference": identity[m]}
        for m, dim in decomposition.dims().items()])
    n = ring.complex_dimension
    polarizations = []
    for j in range(n + 1):
        if decomposition.primitives.get(n - j):
            pol = polarization_on_primitives(sl2, j)
            polarizations.append({"j": j, "degree": pol.degree, "size": pol.gram.shape[0], "rank": pol.rank,
                                  "parity": pol.parity})
    report.add_table("polarization", polarizations)
    report.cite("[h,e]=2e, [h,f]=-2f, [e,f]=h", not sl2.relation_defects(), "lefschetz-sl2")

    cap = guard.max_derivation_basis
    g = derivation_algebra(ring, max_basis=cap)
    algebras = [{"algebra": "g", "fixed": ", ".join(g.fixed), "dim": g.dimension,
                 "basis": "skipped" if g.skipped else "computed"}]
    if ring.pontryagin:
        g_v = derivation_algebra(ring, extra_fixed=list(ring.pontryagin.values()), max_basis=cap)
        algebras.append({"algebra": "g_V", "fixed": ", ".join(g_v.fixed), "dim": g_v.dimension,
                         "basis": "skipped" if g_v.skipped else "computed"})
    report.add_table("derivation_algebra", algebras)

    if g.skipped:
        report.cite("structural checks on g", f"skipped (dim {g.dimension} > {cap})", "derivation-commutant")
    else:
        report.cite("g commutes with the sl2", not sl2_commutant_check(g, sl2), "derivation-commutant")
        report.cite("g preserves primitive cohomology", not preserves_primitives(g, decomposition),
                    "derivation-commutant")
        injective, _ = restriction_injectivity(g, decomposition)
        report.cite("restriction to primitives is injective", injective, "restriction-to-primitives")
        _, rank = trace_form(g)
        report.cite("trace form rank on g (evidence only)", f"{rank}/{g.dimension}", "reductive-derivations")
    return report, EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "homotopy": cmd_homotopy,
    "johnson": cmd_johnson,
    "charclass": cmd_charclass,
    "sixfold": cmd_sixfold,
    "lefschetz": cmd_lefschetz,
}


# --- parser --------------------------------------------------------------------------------

def _add_input(parser: argparse.ArgumentParser, allow_hypersurface: bool = False) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--ring", help="path to a ring JSON file")
    group.add_argument("--builtin", help="name of a builtin ring")
    if allow_hypersurface:
        group.add_argument("--hypersurface", nargs=2, type=int, metavar=("N", "D"),
                           help="smooth degree-D hypersurface of dimension N")
    parser.add_argument("--b2", type=int, help="b2 override for the sixfold builtin")
    parser.add_argument("--b3", type=int, help="b3 override for the sixfold builtin")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output-dir", help="also write <command>.json and CSV tables here")
    common.add_argument("--verbose", action="store_true", help="log a structured summary with metrics")

    parser = argparse.ArgumentParser(prog="homotopy-toolkit",
                                     description="Rational homotopy and characteristic-class invariants.")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", parents=[common], help="check the ring invariants")
    _add_input(p)

    p = commands.add_parser("homotopy", parents=[common], help="π ranks, loop homology and Adams grading")
    _add_input(p)
    p.add_argument("--max-degree", type=int, help="largest homotopy degree T")
    p.add_argument("--formal", dest="formal", action="store_true", default=True)
    p.add_argument("--no-formal", dest="formal", action="store_false")
    p.add_argument("--emit-model", action="store_true", help="include the quadratic DG-Lie model")

    p = commands.add_parser("johnson", parents=[common], help="Johnson target, bounds and distortion")
    _add_input(p, allow_hypersurface=True)

    p = commands.add_parser("charclass", parents=[common], help="complete-intersection characteristic classes")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ambient", type=int, help="ambient projective dimension")
    group.add_argument("--hypersurface", nargs="+", metavar="N D", help="dimension N and degree D (or a..b)")
    p.add_argument("--degrees", help="comma-separated degrees with --ambient")
    p.add_argument("--range", help="degree range a..b with --hypersurface N")

    p = commands.add_parser("sixfold", parents=[common], help="six-manifold derivations and Johnson invariants")
    p.add_argument("--b2", type=int, required=True)
    p.add_argument("--b3", type=int, required=True)
    p.add_argument("--cubic", help="JSON file of [i, j, k, value] entries (default: diagonal cubic)")
    p.add_argument("--a", help="JSON file of [k, s, t, value] derivation coefficients")
    p.add_argument("--witness-surjectivity", action="store_true")
    p.add_argument("--emit-model", action="store_true")

    p = commands.add_parser("lefschetz", parents=[common], help="sl2 action and derivation algebras")
    _add_input(p)
    return parser


def main(argv: Optional[List[str]] = None, output_manager: Optional[OutputManager] = None) -> int:
    """Run one command; returns the process exit code."""
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    guard = ResourceGuard()
    output = output_manager or OutputManager(args.format, args.output_dir)
    logger.start_section(args.command)
    try:
        report, code = COMMANDS[args.command](args, argv, guard)
    except (RingFormatError, UsageError) as e:
        logger.fail(str(e))
        return EXIT_USAGE
    except ResourceLimitError as e:
        logger.fail(f"refused: {e}")
        return EXIT_RESOURCE
    except AlgebraError as e:
        logger.fail(str(e))
        return EXIT_VIOLATION

    output.emit(report)
    if args.verbose:
        logger.structured("run_complete", command=args.command, exit_code=code, metrics=logger.get_metrics())
    return code


if __name__ == "__main__":
    sys.exit(main())
