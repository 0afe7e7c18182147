"""
JSON ring files.

    {
      "name": "P2",                        optional
      "real_dimension": 4,
      "basis": [{"name": "1", "degree": 0}, {"name": "w", "degree": 2}, ...],
      "products": [{"left": "w", "right": "w",
                    "result": [{"name": "w^2", "coeff_num": 1, "coeff_den": 1}]}],
      "integrate": [{"name": "w^2", "value": 1}],
      "omega": [{"name": "w", "coeff_num": 1, "coeff_den": 1}],      optional
      "pontryagin": [{"k": 1, "class": [...]}],                       optional
      "simply_connected": true                                        optional
    }

Products with the unit are implicit and only one ordering of each pair is
stored. ``value`` is an integer or a "p/q" string. Unknown keys are rejected.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, List, Mapping, Union

from core.cohomology_ring import CohomologyRing
from core.errors import LinearAlgebraError, RingFormatError
from core.exact_linear import GradedBasis, SparseVector, fstr, to_scalar

TOP_LEVEL_KEYS = {"name", "real_dimension", "basis", "products", "integrate", "omega",
                  "pontryagin", "simply_connected"}
REQUIRED_KEYS = ("real_dimension", "basis", "products")


def _require_keys(node, allowed, required, location):
    if not isinstance(node, dict):
        raise RingFormatError("expected an object", location)
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        raise RingFormatError(f"unknown keys {unknown}", location)
    for key in required:
        if key not in node:
            raise RingFormatError(f"missing key {key!r}", location)


def _require_list(node, location) -> list:
    if not isinstance(node, list):
        raise RingFormatError("expected a list", location)
    return node


def _integer(value, location) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise RingFormatError(f"expected an integer, got {value!r}", location)
    return value


def _coefficient(term, names, location) -> tuple:
    _require_keys(term, {"name", "coeff_num", "coeff_den"}, ("name", "coeff_num"), location)
    if term["name"] not in names:
        raise RingFormatError(f"unknown class {term['name']!r}", location)
    num = _integer(term["coeff_num"], location)
    den = _integer(term.get("coeff_den", 1), location)
    if den == 0:
        raise RingFormatError("zero denominator", location)
    return term["name"], Fraction(num, den)


def _linear_combination(node, names, location) -> Dict[str, Fraction]:
    out: Dict[str, Fraction] = {}
    for k, term in enumerate(_require_list(node, location)):
        name, value = _coefficient(term, names, f"{location}[{k}]")
        out[name] = out.get(name, Fraction(0)) + value
    return out


def parse_ring(document: Union[str, Mapping], validate: bool = True, source: str = "") -> CohomologyRing:
    """
    Build a ring from a JSON string or an already decoded document.

    Raises:
        RingFormatError: schema violations, duplicate names, no fundamental class.
        RingValidationError: the ring violates an invariant and ``validate`` is set.
    """
    prefix = f"{source}: " if source else ""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise RingFormatError(f"invalid JSON ({exc.msg})", f"{prefix}line {exc.lineno}") from None
    _require_keys(document, TOP_LEVEL_KEYS, REQUIRED_KEYS, f"{prefix}<root>".strip())

    real_dimension = _integer(document["real_dimension"], f"{prefix}real_dimension")
    entries = []
    seen = set()
    for k, item in enumerate(_require_list(document["basis"], f"{prefix}basis")):
        location = f"{prefix}basis[{k}]"
        _require_keys(item, {"name", "degree"}, ("name", "degree"), location)
        name = item["name"]
        if not isinstance(name, str) or not name:
            raise RingFormatError(f"invalid name {name!r}", location)
        if name in seen:
            raise RingFormatError(f"duplicate basis name {name!r}", location)
        seen.add(name)
        degree = _integer(item["degree"], location)
        if degree < 0:
            raise RingFormatError(f"negative degree {degree}", location)
        entries.append((name, degree))
    basis = GradedBasis(entries)

    products = {}
    for k, item in enumerate(_require_list(document["products"], f"{prefix}products")):
        location = f"{prefix}products[{k}]"
        _require_keys(item, {"left", "right", "result"}, ("left", "right", "result"), location)
        for side in ("left", "right"):
            if item[side] not in seen:
                raise RingFormatError(f"unknown class {item[side]!r}", location)
        key = (item["left"], item["right"])
        if key in products:
            raise RingFormatError(f"product {key[0]}*{key[1]} listed twice", location)
        products[key] = _linear_combination(item["result"], seen, f"{location}.result")

    integrate = document.get("integrate")
    if not integrate:
        raise RingFormatError("no fundamental class", f"{prefix}integrate")
    integration = {}
    for k, item in enumerate(_require_list(integrate, f"{prefix}integrate")):
        location = f"{prefix}integrate[{k}]"
        _require_keys(item, {"name", "value"}, ("name", "value"), location)
        if item["name"] not in seen:
            raise RingFormatError(f"unknown class {item['name']!r}", location)
        if isinstance(item["value"], (bool, float)):
            raise RingFormatError(f"value {item['value']!r} is not an exact rational", location)
        try:
            integration[item["name"]] = to_scalar(item["value"])
        except LinearAlgebraError as exc:
            raise RingFormatError(str(exc), location) from None

    omega = None
    if "omega" in document:
        omega = _linear_combination(document["omega"], seen, f"{prefix}omega")
    pontryagin = {}
    for k, item in enumerate(_require_list(document.get("pontryagin", []), f"{prefix}pontryagin")):
        location = f"{prefix}pontryagin[{k}]"
        _require_keys(item, {"k", "class"}, ("k", "class"), location)
        index = _integer(item["k"], location)
        if index < 1 or index in pontryagin:
            raise RingFormatError(f"invalid or repeated index k={index}", location)
        pontryagin[index] = _linear_combination(item["class"], seen, f"{location}.class")
    simply_connected = document.get("simply_connected", True)
    if not isinstance(simply_connected, bool):
        raise RingFormatError("expected true or false", f"{prefix}simply_connected")
    name = document.get("name", source or "ring")

    ring = CohomologyRing(real_dimension, basis, products, integration, omega=omega,
                          pontryagin=pontryagin, simply_connected=simply_connected, name=str(name))
    if validate:
        ring.require_valid()
    return ring


def load_ring(path: str, validate: bool = True) -> CohomologyRing:
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as exc:
        raise RingFormatError(f"cannot read ring file ({exc.strerror})", path) from None
    return parse_ring(text, validate=validate, source=path)


def _terms(vector: SparseVector, names) -> List[dict]:
    return [{"name": names[i], "coeff_num": c.numerator, "coeff_den": c.denominator} for i, c in vector.items()]


def _value(x: Fraction):
    return x.numerator if x.denominator == 1 else fstr(x)


def serialize_ring(ring: CohomologyRing) -> dict:
    """The JSON document of ``ring``; products stored for left index <= right index."""
    names = ring.basis.names
    document = {
        "name": ring.name,
        "real_dimension": ring.real_dimension,
        "basis": [{"name": n, "degree": d} for n, d in ring.basis],
        "products": [],
        "integrate": [{"name": names[i], "value": _value(v)} for i, v in sorted(ring.integration.items())],
    }
    for (i, j), entries in ring.nonzero_products():
        if i > j or ring.unit_index in (i, j):
            continue
        vector = SparseVector(len(names), entries)
        document["products"].append({"left": names[i], "right": names[j], "result": _terms(vector, names)})
    if ring.omega is not None:
        document["omega"] = _terms(ring.omega, names)
    if ring.pontryagin:
        document["pontryagin"] = [{"k": k, "class": _terms(p, names)} for k, p in ring.pontryagin.items()]
    document["simply_connected"] = ring.simply_connected
    return document


def dumps_ring(ring: CohomologyRing) -> str:
    return json.dumps(serialize_ring(ring), indent=2)


def save_ring(ring: CohomologyRing, path: str) -> None:
    with open(path, "w") as f:
        f.write(dumps_ring(ring) + "\n")
