"""Lipschitz constants of losses and layered hypotheses.

Losses carry separately-Lipschitz constants (one per argument); hypotheses
built from affine layers and fixed-constant activations get the spectral-norm
product upper bound, which keeps the error bound valid (any upper bound on
the hypothesis constant does).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _rows(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


@dataclass(frozen=True)
class LipschitzSpec:
    l_h: float
    l_loss_label: float
    l_loss_output: float

    def __post_init__(self):
        for name in ("l_h", "l_loss_label", "l_loss_output"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


class LossSpec:
    """A loss with a known separately-Lipschitz constant pair and a sampling
    domain on which those constants are valid."""

    def constants(self) -> tuple[float, float]:
        raise NotImplementedError

    def evaluate(self, y: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample_domain(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw n label values and n output values from the loss's domain."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(spec: dict) -> "LossSpec":
        kind = spec.get("kind")
        if kind == "absolute_error":
            return AbsoluteError()
        if kind == "squared_error_bounded":
            return SquaredErrorBounded(float(spec["m"]))
        if kind == "cross_entropy_clamped":
            return CrossEntropyClamped(float(spec["a"]))
        raise ValueError(f"unknown loss kind {kind!r}")


@dataclass(frozen=True)
class AbsoluteError(LossSpec):
    """|y - y'| on the real line (Euclidean norm for vector labels)."""

    def constants(self):
        return (1.0, 1.0)

    def evaluate(self, y, y_pred):
        y = _rows(y)
        y_pred = _rows(y_pred)
        return np.linalg.norm(y - y_pred, axis=1)

    def sample_domain(self, rng, n):
        return rng.uniform(-10, 10, n), rng.uniform(-10, 10, n)

    def to_dict(self):
        return {"kind": "absolute_error"}


@dataclass(frozen=True)
class SquaredErrorBounded(LossSpec):
    """(y - y')^2 on [0, M]^2; not globally Lipschitz, so M is required."""

    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("M must be > 0")

    def constants(self):
        return (2.0 * self.m, 2.0 * self.m)

    def evaluate(self, y, y_pred):
        y = _rows(y)
        y_pred = _rows(y_pred)
        return ((y - y_pred) ** 2).sum(axis=1)

    def sample_domain(self, rng, n):
        return rng.uniform(0, self.m, n), rng.uniform(0, self.m, n)

    def to_dict(self):
        return {"kind": "squared_error_bounded", "m": self.m}


@dataclass(frozen=True)
class CrossEntropyClamped(LossSpec):
    """Binary cross entropy with outputs clamped to [a, 1-a]."""

    a: float

    def __post_init__(self):
        if not 0 < self.a < 0.5:
            raise ValueError("clamp parameter a must lie in (0, 0.5)")

    def constants(self):
        return (float(np.log((1.0 - self.a) / self.a)), 1.0 / self.a)

    def evaluate(self, y, y_pred):
        y = np.asarray(y, dtype=float).ravel()
        p = np.asarray(y_pred, dtype=float).ravel()
        if (p < self.a - 1e-12).any() or (p > 1 - self.a + 1e-12).any():
            raise ValueError(f"predictions must lie in [{self.a}, {1 - self.a}]")
        p = np.clip(p, self.a, 1.0 - self.a)
        return -y * np.log(p) - (1.0 - y) * np.log(1.0 - p)

    def sample_domain(self, rng, n):
        return rng.uniform(0, 1, n), rng.uniform(self.a, 1 - self.a, n)

    def to_dict(self):
        return {"kind": "cross_entropy_clamped", "a": self.a}


def loss_lipschitz(loss: LossSpec) -> tuple[float, float]:
    """Catalog constants (label-side, output-side) for the given loss."""
    return loss.constants()


def layered_hypothesis_lipschitz(weight_spectral_norms, activation_constants) -> float:
    """Spectral-product upper bound for affine-plus-activation stacks."""
    norms = np.asarray(weight_spectral_norms, dtype=float)
    acts = np.asarray(activation_constants, dtype=float)
    if norms.size == 0:
        raise ValueError("need at least one layer norm")
    if (norms < 0).any() or (acts < 0).any():
        raise ValueError("norms and activation constants must be >= 0")
    if acts.size not in (0, norms.size - 1):
        raise ValueError(
            "expected one activation constant between consecutive layers "
            f"({norms.size - 1}), got {acts.size}"
        )
    return float(np.prod(norms) * (np.prod(acts) if acts.size else 1.0))


def verify_separate_lipschitz(
    loss: LossSpec,
    pair_samples: int,
    seed: int,
    constants: tuple[float, float] | None = None,
    slack: float = 1e-9,
) -> bool:
    """Monte-Carlo check of |l(y1,p1) - l(y2,p2)| <= L*|y1-y2| + L'*|p1-p2|.

    ``constants`` overrides the catalog pair (used to show tightness).
    """
    l_lab, l_out = constants if constants is not None else loss.constants()
    rng = np.random.default_rng(seed)
    y1, p1 = loss.sample_domain(rng, pair_samples)
    y2, p2 = loss.sample_domain(rng, pair_samples)
    lhs = np.abs(loss.evaluate(y1, p1) - loss.evaluate(y2, p2))
    rhs = l_lab * np.abs(y1 - y2) + l_out * np.abs(p1 - p2)
    return bool((lhs <= rhs + slack).all())
