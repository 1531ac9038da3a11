"""Result container for singular-value studies."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import eps_rank

__all__ = ["SpectrumResult"]

_RANK_EPSILONS = (1e-05, 1e-06, 1e-07, 1e-08, 1e-09, 1e-10)


@dataclass
class SpectrumResult:
    """Normalized singular values sigma_j / sigma_1 with provenance metadata."""

    label: str
    sigmas: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=float)
        if s.size == 0 or s[0] <= 0.0:
            raise ValueError("spectrum must have a positive leading singular value")
        s = s / s[0]
        if np.any(np.diff(s) > 1e-12):
            raise ValueError("singular values must be non-increasing")
        self.sigmas = s
        self.metadata = dict(self.metadata)
        self.metadata["tolerance_ranks"] = {
            eps: eps_rank(s, eps) for eps in _RANK_EPSILONS
        }

    def rank_at(self, eps) -> int:
        return eps_rank(self.sigmas, eps)
