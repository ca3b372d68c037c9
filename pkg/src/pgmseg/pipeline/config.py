from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any

from ..imagecore import Provenance, TriMap


class Mode(str, Enum):
    """Initialization mode."""

    SEMI = "semi"  #: Semi-automatic, trimap from a bounding box or trimap file
    AUTO = "auto"  #: Automatic, trimap from a foreground probability map
    GB = "gb"  #: Unary probabilities estimated using only the background model


class Solver(str, Enum):
    """Inference scheme."""

    SGM = "sgm"  #: Spectral graph matching
    PGM = "pgm"  #: Probabilistic graph matching (iteratively reweighted SGM)


@dataclass(frozen=True)
class SegConfig:
    """Segmentation parameters."""

    k_f: int = 3  #: Number of foreground GMM components
    k_b: int = 3  #: Number of background GMM components
    m: int = 4  #: Number of most similar neighbors with a pairwise term
    lam: float = 2.0  #: Weight of the unary term
    refine_iters: int = 10  #: Maximum number of refinement iterations
    runs: int = 10  #: Number of reruns for majority voting
    seed: int = 0  #: Master seed, rerun r uses ``seed + r``
    mode: Mode = Mode.SEMI  #: Initialization mode
    solver: Solver = Solver.PGM  #: Inference scheme
    target_sp_size: int = 200  #: Approximate superpixel size in pixels
    p0: float = 0.4  #: Background threshold of prior maps
    ring_width: int = 10  #: Width of the background training ring around a bounding box
    pgm_rounds: int = 10  #: Maximum number of PGM reweighting rounds
    pgm_tol: float = 1e-4  #: Convergence threshold of the PGM marginals
    #: Restrict background training of prior maps to a ring of this width (None: all background)
    prior_ring: int | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
        except ValueError:
            raise ValueError(
                f"Invalid mode '{self.mode}', use one of {[m.value for m in Mode]}"
            ) from None
        try:
            object.__setattr__(self, "solver", Solver(self.solver))
        except ValueError:
            raise ValueError(
                f"Invalid solver '{self.solver}', use one of {[s.value for s in Solver]}"
            ) from None
        for name in ("k_f", "k_b", "m", "refine_iters", "runs", "target_sp_size", "pgm_rounds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not 0 <= self.p0 <= 1:
            raise ValueError(f"p0 must be in [0, 1], got {self.p0}")
        if self.ring_width < 0:
            raise ValueError(f"ring_width must be >= 0, got {self.ring_width}")
        if self.prior_ring is not None and self.prior_ring < 0:
            raise ValueError(f"prior_ring must be >= 0, got {self.prior_ring}")
        if not self.pgm_tol > 0:
            raise ValueError(f"pgm_tol must be positive, got {self.pgm_tol}")

    def replace(self, **changes) -> "SegConfig":
        """Copy with changed fields."""
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Plain dictionary (enums as values), e.g. for records."""
        result = asdict(self)
        result["mode"] = self.mode.value
        result["solver"] = self.solver.value
        return result


#: Trimap sources accepted by each mode
MODE_PROVENANCES: dict[Mode, frozenset[Provenance]] = {
    Mode.SEMI: frozenset({Provenance.BBOX, Provenance.TRIMAP_FILE}),
    Mode.AUTO: frozenset({Provenance.PRIOR_MAP}),
    Mode.GB: frozenset(Provenance),
}


def check_mode(config: SegConfig, trimap: TriMap):
    """
    Check that the trimap source fits the mode.

    Semi-automatic mode needs a bounding box or trimap file, automatic mode a prior map.
    Background-only mode accepts any source.

    Raises:
        ValueError: If the mode does not accept the trimap
    """
    accepted = MODE_PROVENANCES[config.mode]
    if trimap.provenance not in accepted:
        raise ValueError(
            f"Mode '{config.mode.value}' requires a trimap from "
            f"{' or '.join(sorted(p.value for p in accepted))}, "
            f"got {trimap.provenance.value}"
        )
