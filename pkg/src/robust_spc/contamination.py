"""Phase I data generators: clean baseline and the three outlier models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Role, RngStream, derive_seed, substream

__all__ = ["MODEL_KINDS", "OutlierModel", "Phase1Data", "sample_phase1", "phase1_replicates"]

CLEAN = "clean"
DIFFUSE_SYMMETRIC = "m1"
DIFFUSE_ASYMMETRIC = "m2"
LOCALIZED = "m3"
MODEL_KINDS = (CLEAN, DIFFUSE_SYMMETRIC, DIFFUSE_ASYMMETRIC, LOCALIZED)

EPSILON = 0.20


@dataclass(frozen=True)
class OutlierModel:
    """Contamination mechanism.

    ``a`` is the outlier standard-deviation multiplier for m1/m3 and the
    chi-square degrees of freedom for m2; it is ignored for ``clean``.
    """

    kind: str = CLEAN
    a: float = 1.0
    epsilon: float = EPSILON

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown outlier model {self.kind!r}")
        if self.epsilon != EPSILON:
            raise ValueError("contamination fraction is fixed at 0.20")
        if self.kind == CLEAN:
            object.__setattr__(self, "a", 1.0)
        elif self.kind == DIFFUSE_ASYMMETRIC:
            if float(self.a) != int(self.a) or self.a < 1:
                raise ValueError(f"model m2 needs integer degrees of freedom, got a={self.a}")
        elif not self.a >= 1.0:
            raise ValueError(f"severity a must be >= 1, got {self.a}")

    @property
    def label(self) -> str:
        return self.kind if self.kind == CLEAN else f"{self.kind}(a={self.a:g})"

    def cell_seed(self, root_seed: int) -> int:
        """Root seed for this model cell, distinct per (kind, a)."""
        code = MODEL_KINDS.index(self.kind)
        return derive_seed(root_seed, code, round(self.a * 1_000_000))


@dataclass
class Phase1Data:
    subgroups: np.ndarray
    contaminated: np.ndarray

    @property
    def k(self) -> int:
        return self.subgroups.shape[0]

    @property
    def n(self) -> int:
        return self.subgroups.shape[1]


def sample_phase1(model: OutlierModel, k: int, n: int, stream: RngStream) -> Phase1Data:
    """Draw k subgroups of n observations under ``model``.

    Model 3 picks exactly round(0.2 k) subgroups, using the stream's
    model3-selection sibling.
    """
    if k < 2 or n < 2:
        raise ValueError(f"need k >= 2 and n >= 2, got k={k}, n={n}")
    z = stream.normal(0.0, 1.0, size=(k, n))
    if model.kind == CLEAN:
        return Phase1Data(z, np.zeros((k, n), dtype=bool))
    if model.kind == LOCALIZED:
        n_out = int(math.floor(model.epsilon * k + 0.5))
        picked = stream.with_role(Role.MODEL3_SELECTION).generator.choice(k, size=n_out, replace=False)
        rows = np.zeros(k, dtype=bool)
        rows[picked] = True
        mask = np.repeat(rows[:, None], n, axis=1)
        return Phase1Data(np.where(mask, model.a * z, z), mask)
    mask = stream.uniform(size=(k, n)) < model.epsilon
    if model.kind == DIFFUSE_SYMMETRIC:
        return Phase1Data(np.where(mask, model.a * z, z), mask)
    outliers = stream.chisquare(int(model.a), size=(k, n))
    return Phase1Data(np.where(mask, outliers, z), mask)


def phase1_replicates(model: OutlierModel, k: int, n: int, root_seed: int, start: int, stop: int,
                      role: int = Role.PHASE1_DATA) -> np.ndarray:
    """Subgroup arrays for replicates ``start..stop-1``, shape (R, k, n)."""
    out = np.empty((stop - start, k, n))
    for i, rep in enumerate(range(start, stop)):
        out[i] = sample_phase1(model, k, n, substream(root_seed, rep, role)).subgroups
    return out
