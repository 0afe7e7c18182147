import os
import json
from typing import Dict, Optional

from core.adams_loop import estimate_e1_size
from core.cohomology_ring import CohomologyRing
from core.errors import ResourceLimitError
from utils.logger import logger


class ResourceGuard:
    """
    Engine limits read from config/engine_config.json, with the basis-size cap
    overridable through HOMOTOPY_MAX_BASIS_WORDS.
    """

    def __init__(self, config_path: Optional[str] = None):
        path = config_path or os.getenv("HOMOTOPY_ENGINE_CONFIG", "config/engine_config.json")
        self.config = self._load_config(path)

    def _load_config(self, path: str) -> Dict:
        """Load engine limits from a JSON file."""
        try:
            with open(path, 'r') as f:
                config = json.load(f)
                logger.log(f"Loaded engine config from {path}")
                return {**self._get_default_config(), **config}
        except FileNotFoundError:
            logger.info(f"Engine config {path} not found. Using defaults.")
            return self._get_default_config()
        except json.JSONDecodeError:
            logger.fail(f"Invalid JSON in {path}. Using defaults.")
            return self._get_default_config()

    def _get_default_config(self) -> Dict:
        return {
            "max_basis_words": 2000000,
            "max_derivation_basis": 400,
            "representative_limit": 5000,
            "default_truncation_padding": 2,
            "report_version": "1.0",
        }

    @property
    def max_basis_words(self) -> int:
        override = os.getenv("HOMOTOPY_MAX_BASIS_WORDS")
        if override:
            try:
                return int(override)
            except ValueError:
                logger.fail(f"Ignoring non-integer HOMOTOPY_MAX_BASIS_WORDS={override!r}")
        return int(self.config["max_basis_words"])

    @property
    def max_derivation_basis(self) -> int:
        return int(self.config["max_derivation_basis"])

    @property
    def representative_limit(self) -> int:
        return int(self.config["representative_limit"])

    @property
    def default_truncation_padding(self) -> int:
        return int(self.config["default_truncation_padding"])

    @property
    def report_version(self) -> str:
        return str(self.config["report_version"])

    def check_tensor_budget(self, ring: CohomologyRing, truncation: int, what: str, per_degree: int = 1) -> int:
        """
        Estimated E1 size up to total degree ``per_degree * truncation``; refuses above the cap.

        The refusal names the largest ``truncation`` that would fit.
        """
        estimate = estimate_e1_size(ring, per_degree * truncation)
        cap = self.max_basis_words
        if estimate > cap:
            affordable = self.max_affordable_truncation(ring, limit=per_degree * truncation) // per_degree
            logger.info(f"{what} of {ring.name} refused; truncation {affordable} fits the cap")
            raise ResourceLimitError(what, estimate, cap, affordable=affordable)
        logger.log(f"{what}: about {estimate} tensor words (cap {cap})")
        return estimate

    def max_affordable_truncation(self, ring: CohomologyRing, limit: int = 64) -> int:
        """Largest total degree whose E1 estimate stays within the cap."""
        cap = self.max_basis_words
        best = 0
        for t in range(1, limit + 1):
            if estimate_e1_size(ring, t) > cap:
                break
            best = t
        return best
