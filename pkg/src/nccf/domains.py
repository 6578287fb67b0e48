"""Concrete matrix convex domains: nc polydisc, nc mixed ball, row ball.

Each domain is open, circled, bounded and matrix convex, and sits between
two row balls ``N_γ ⊆ K ⊆ N_Γ``. Membership is strict with no tolerance.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionMismatch, NotIsometry
from .ncpoly import MatTuple, opnorm

KINDS = ("polydisc", "mixedball", "rowball")

ISOMETRY_TOL = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """Descriptor of one of the three supported domain families.

    For ``mixedball`` the tuple has ``d * dprime`` entries ordered
    ``X_{1,1}, X_{1,2}, ..., X_{d,dprime}`` and is assembled into a
    d×dprime block operator. For ``rowball`` the tuple has ``d`` entries
    and ``gamma`` is the radius.
    """

    kind: str
    d: int
    dprime: int = 1
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.d < 1 or self.dprime < 1:
            raise ValueError("d and dprime must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def ntuple(self) -> int:
        """Number of matrices in a point of the domain."""
        return self.d * self.dprime if self.kind == "mixedball" else self.d

    @property
    def inner_radius(self) -> float:
        """γ with ``N_γ ⊆ K``."""
        if self.kind == "rowball":
            return self.gamma
        return 0.99 / math.sqrt(self.ntuple)

    @property
    def outer_radius(self) -> float:
        """Γ with ``K ⊆ N_Γ``."""
        if self.kind == "rowball":
            return self.gamma
        return 1.01 * math.sqrt(self.ntuple)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "d": self.d}
        if self.kind == "mixedball":
            out["dprime"] = self.dprime
        if self.kind == "rowball":
            out["gamma"] = self.gamma
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> DomainSpec:
        kind = str(obj["kind"]).lower()
        return cls(kind, int(obj["d"]), int(obj.get("dprime", 1)), float(obj.get("gamma", 1.0)))


def polydisc(d: int) -> DomainSpec:
    return DomainSpec("polydisc", d)


def mixedball(d: int, dprime: int) -> DomainSpec:
    return DomainSpec("mixedball", d, dprime)


def rowball(gamma: float, d: int) -> DomainSpec:
    return DomainSpec("rowball", d, gamma=gamma)


def row_norm(X: MatTuple) -> float:
    """σ_max of ``[X_1 ... X_d]``, i.e. ``||Σ X_j X_j*||^{1/2}``."""
    return opnorm(X.row())


def block_operator(D: DomainSpec, X: MatTuple) -> np.ndarray:
    """The d×dprime block matrix ``(X_{ij})`` of a mixed-ball point."""
    _check(D, X)
    rows = [np.concatenate([X[i * D.dprime + j] for j in range(D.dprime)], axis=1) for i in range(D.d)]
    return np.concatenate(rows, axis=0)


def _check(D: DomainSpec, X: MatTuple):
    if X.d != D.ntuple:
        raise DimensionMismatch(f"{D.kind} expects {D.ntuple} matrices, got {X.d}")


def gauge(D: DomainSpec, X: MatTuple) -> float:
    """Minkowski functional: ``X ∈ D`` iff ``gauge < 1``."""
    _check(D, X)
    if X.n == 0:
        return 0.0
    if D.kind == "polydisc":
        return max(opnorm(x) for x in X)
    if D.kind == "mixedball":
        return opnorm(block_operator(D, X))
    return row_norm(X) / D.gamma


def member(D: DomainSpec, X: MatTuple) -> bool:
    return gauge(D, X) < 1.0


def scaling_radius(D: DomainSpec, X: MatTuple) -> float:
    """``sup{s > 0 : sX ∈ D}``; ``math.inf`` when X is zero."""
    g = gauge(D, X)
    return math.inf if g == 0 else 1.0 / g


def ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def sample(D: DomainSpec, n: int, rng_seed, margin: float = 0.1) -> MatTuple:
    """Random point of D at relative radius ``1 - margin``.

    Ginibre matrices rescaled onto the level set ``gauge = 1 - margin``.
    ``rng_seed`` may be an int or a ``numpy.random.Generator``.
    """
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    rng = np.random.default_rng(rng_seed)
    X = MatTuple(ginibre(rng, (D.ntuple, n, n)))
    return X.scale((1 - margin) * scaling_radius(D, X))


def direct_sum(X: MatTuple, Y: MatTuple) -> MatTuple:
    if X.d != Y.d:
        raise DimensionMismatch("direct sum of tuples of different length")
    return MatTuple([block_diag(a, b) for a, b in zip(X, Y)])


def check_isometry(V: np.ndarray, tol: float = ISOMETRY_TOL):
    V = np.atleast_2d(V)
    err = np.abs(V.conj().T @ V - np.eye(V.shape[1])).max() if V.size else 0.0
    if err > tol:
        raise NotIsometry(f"V*V differs from the identity by {err:.3g}")


def conjugate_isometry(X: MatTuple, V: np.ndarray) -> MatTuple:
    """``(V*X_1V, ..., V*X_dV)`` for an m×n isometry V and X of size m."""
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    if V.shape[0] != X.n:
        raise DimensionMismatch(f"isometry has {V.shape[0]} rows, tuple has size {X.n}")
    check_isometry(V)
    Vh = V.conj().T
    return MatTuple([Vh @ x @ V for x in X])


def random_isometry(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """Haar-distributed m×n isometry (QR of a Ginibre matrix, phases fixed)."""
    if n > m:
        raise ValueError("an isometry needs m >= n")
    q, r = np.linalg.qr(ginibre(rng, (m, n)))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
