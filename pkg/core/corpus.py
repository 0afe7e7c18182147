import os
import json
from typing import Callable, Dict, List, Mapping, Optional

from core.char_class import ci_to_ring, hypersurface
from core.cohomology_ring import CohomologyRing
from core.errors import RingFormatError
from core.ring_builders import (
    build_exterior_algebra, build_product, build_projective_space, build_six_manifold, build_sphere,
    diagonal_cubic,
)
from utils.logger import logger


class RingCorpus:
    """
    The builtin rings, declared family by family in config/builtin_rings.json.

    Args:
        config_path: JSON file with a ``rings`` mapping of name -> {family, parameters}.
            Defaults to HOMOTOPY_BUILTINS_PATH, then config/builtin_rings.json.
    """

    def __init__(self, config_path: Optional[str] = None):
        path = config_path or os.getenv("HOMOTOPY_BUILTINS_PATH", "config/builtin_rings.json")
        self.config = self._load_config(path)
        self._builders: Dict[str, Callable[..., CohomologyRing]] = {
            "projective": lambda entry, **_: build_projective_space(int(entry["m"])),
            "sphere": lambda entry, **_: build_sphere(int(entry["k"])),
            "exterior": lambda entry, **_: build_exterior_algebra([int(d) for d in entry["degrees"]]),
            "product": self._build_product,
            "hypersurface": lambda entry, **_: ci_to_ring(hypersurface(int(entry["n"]), int(entry["d"]))),
            "sixfold": self._build_sixfold,
        }

    def _load_config(self, path: str) -> Dict:
        try:
            with open(path, 'r') as f:
                config = json.load(f)
                logger.log(f"Loaded {len(config.get('rings', {}))} builtin ring definitions")
                return config
        except FileNotFoundError:
            logger.info(f"Builtin ring file {path} not found. Using default corpus.")
            return self._get_default_config()
        except json.JSONDecodeError:
            logger.fail(f"Invalid JSON in {path}. Using default corpus.")
            return self._get_default_config()

    def _get_default_config(self) -> Dict:
        return {
            "rings": {
                "P1": {"family": "projective", "m": 1},
                "P2": {"family": "projective", "m": 2},
                "P3": {"family": "projective", "m": 3},
                "P1xP1": {"family": "product", "factors": ["P1", "P1"]},
                "P1xP2": {"family": "product", "factors": ["P1", "P2"]},
                "S3-ring": {"family": "sphere", "k": 3},
                "S3xS3": {"family": "product", "factors": ["S3-ring", "S3-ring"]},
                "quintic": {"family": "hypersurface", "n": 3, "d": 5},
                "cubic-threefold": {"family": "hypersurface", "n": 3, "d": 3},
                "quartic-threefold": {"family": "hypersurface", "n": 3, "d": 4},
                "U5-exterior": {"family": "exterior", "degrees": [1, 3, 5, 7, 9]},
                "sixfold": {"family": "sixfold", "b2": 2, "b3": 2, "cubic": "diagonal", "omega": "sum"},
            }
        }

    @property
    def definitions(self) -> Dict[str, Dict]:
        return self.config.get("rings", {})

    def names(self) -> List[str]:
        return list(self.definitions)

    def build(self, name: str, **overrides) -> CohomologyRing:
        """Build a builtin ring; ``overrides`` replace parameters of its definition (e.g. b2, b3)."""
        entry = self.definitions.get(name)
        if entry is None:
            raise RingFormatError(f"unknown builtin {name!r}; known: {', '.join(self.names())}", "--builtin")
        entry = {**entry, **{k: v for k, v in overrides.items() if v is not None}}
        builder = self._builders.get(entry.get("family"))
        if builder is None:
            raise RingFormatError(f"unknown family {entry.get('family')!r}", f"builtin {name}")
        ring = builder(entry, name=name)
        if not overrides or all(v is None for v in overrides.values()):
            ring.name = name
        return ring

    def rings(self, simply_connected_only: bool = False) -> List[CohomologyRing]:
        built = [self.build(name) for name in self.names()]
        if simply_connected_only:
            built = [ring for ring in built if ring.simply_connected]
        return built

    def _build_product(self, entry: Mapping, name: str = "") -> CohomologyRing:
        left, right = entry["factors"]
        return build_product(self.build(left), self.build(right), name=name or f"{left}x{right}")

    def _build_sixfold(self, entry: Mapping, name: str = "") -> CohomologyRing:
        b2, b3 = int(entry["b2"]), int(entry["b3"])
        cubic = entry.get("cubic", "diagonal")
        if cubic == "diagonal":
            cubic = diagonal_cubic(b2)
        elif isinstance(cubic, list):
            cubic = {(int(i), int(j), int(k)): v for i, j, k, v in cubic}
        omega = entry.get("omega", "sum")
        if omega == "sum":
            omega = [1] * b2
        return build_six_manifold(b2, b3, cubic, omega=omega, name=f"sixfold(b2={b2},b3={b3})")
