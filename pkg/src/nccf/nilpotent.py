"""Λ-nilpotent tuples: testing, sampling inside a domain, compression.

Samplers are built from *pattern families*: tuples whose only nonzero
entries sit at a fixed set of positions ``(j, row, col)``. The pattern is
chosen so that every tuple in the family is Λ-nilpotent by structure, and
the family is linear in its real parameter vector, which the optimizer in
:mod:`nccf.cfp` exploits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import DomainSpec, conjugate_isometry, direct_sum, gauge, random_isometry
from .errors import NotIsometry
from .fock import FockBasis, edges
from .freewords import InitialSegment, minimal_non_members
from .ncpoly import MatTuple, opnorm, word_powers

STRATEGIES = ("weighted_shift", "graded_random", "unitary_conjugated", "direct_sum_mix")

NILPOTENT_TOL = 1e-12


def nilpotency_residual(X: MatTuple, seg: InitialSegment) -> float:
    """``max ||X^v||`` over the minimal words outside the segment."""
    if X.d != seg.d:
        raise ValueError(f"tuple has {X.d} entries, segment alphabet has {seg.d}")
    gens = minimal_non_members(seg)
    powers = word_powers(X, gens)
    return max((opnorm(powers[v]) for v in gens), default=0.0)


def is_lambda_nilpotent(X: MatTuple, seg: InitialSegment, tol: float = NILPOTENT_TOL) -> bool:
    """True iff ``X^v = 0`` (to ``tol``) for every word v outside the segment.

    Only the minimal non-members are multiplied out. Any word outside the
    segment has a shortest factor outside it, that factor is minimal, and
    ``X^v`` then factors through a zero product, so the finite check
    covers the whole ideal.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return nilpotency_residual(X, seg) <= tol


# -- pattern families --------------------------------------------------------


class PatternFamily:
    """Tuples of size n supported on fixed entries, one complex parameter each.

    The real parameter vector has length ``2 * len(positions)``: real
    parts first, then imaginary parts.
    """

    def __init__(self, d: int, n: int, positions):
        pos = np.array(positions, dtype=int).reshape(-1, 3)
        self.d, self.n = d, n
        self.positions = pos

    @property
    def ncomplex(self) -> int:
        return len(self.positions)

    @property
    def nparams(self) -> int:
        return 2 * self.ncomplex

    def build(self, theta: np.ndarray) -> MatTuple:
        m = self.ncomplex
        z = theta[:m] + 1j * theta[m:]
        mats = np.zeros((self.d, self.n, self.n), dtype=complex)
        if m:
            mats[self.positions[:, 0], self.positions[:, 1], self.positions[:, 2]] = z
        return MatTuple(mats)

    def params_from_complex(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.concatenate([z.real, z.imag])

    def random_params(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.nparams) / np.sqrt(2)


def shift_family(seg: InitialSegment, sizes: dict | None = None) -> PatternFamily:
    """Block-weighted Λ-shifts.

    The space is ``⊕_{w∈Λ} C^{k_w}`` and ``X_j`` maps block ``w`` into
    block ``g_j w`` by an arbitrary matrix (zero when ``g_j w ∉ Λ``). With
    all ``k_w = 1`` this is the scalar-weighted shift whose all-ones member
    is :func:`nccf.fock.lambda_shift`.
    """
    basis = FockBasis(seg)
    k = {w: (1 if sizes is None else int(sizes.get(w, 1))) for w in basis.words}
    offset, n = {}, 0
    for w in basis.words:
        offset[w] = n
        n += k[w]
    pos = []
    for j, w in edges(seg):
        gw = (j,) + w
        for a in range(k[gw]):
            for b in range(k[w]):
                pos.append((j - 1, offset[gw] + a, offset[w] + b))
    return PatternFamily(seg.d, n, pos)


def graded_family(d: int, dims) -> PatternFamily:
    """Tuples mapping ``V_m`` into ``V_{m+1}`` for a grading ``V_0 ⊕ ... ⊕ V_ℓ``.

    Any product of ``ℓ + 1`` of them vanishes, so every member is
    ``Λ(ℓ)``-nilpotent.
    """
    dims = [int(k) for k in dims]
    offs = np.concatenate([[0], np.cumsum(dims)])
    pos = []
    for j in range(d):
        for m in range(len(dims) - 1):
            for a in range(dims[m + 1]):
                for b in range(dims[m]):
                    pos.append((j, offs[m + 1] + a, offs[m] + b))
    return PatternFamily(d, int(offs[-1]), pos)


# -- samplers ----------------------------------------------------------------


@dataclass(frozen=True)
class NilpotentSampleConfig:
    strategy: str = "weighted_shift"
    n_max: int = 64
    seed: int = 0
    margin: float = 1e-6
    max_block: int = 2

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0 < self.margin < 1:
            raise ValueError("margin must lie in (0, 1)")
        if self.max_block < 1:
            raise ValueError("max_block must be >= 1")


def to_level(D: DomainSpec, X: MatTuple, margin: float) -> MatTuple:
    """Rescale X onto ``gauge = 1 - margin`` (zero tuples are returned unchanged)."""
    g = gauge(D, X)
    return X if g == 0 else X.scale((1 - margin) / g)


def retract(D: DomainSpec, X: MatTuple, margin: float) -> MatTuple:
    """Shrink X onto ``gauge = 1 - margin`` only if it lies beyond that level."""
    g = gauge(D, X)
    return X if g <= 1 - margin else X.scale((1 - margin) / g)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    return random_isometry(rng, n, n)


def _graded_dims(rng, seg: InitialSegment, n_max: int, max_block: int) -> list[int]:
    levels = seg.max_length + 1
    if levels > n_max:
        raise ValueError(f"n_max={n_max} too small for {levels} grading levels")
    dims = list(rng.integers(1, max_block + 1, size=levels))
    while sum(dims) > n_max:
        i = int(np.argmax(dims))
        dims[i] -= 1
    return dims


def sample_nilpotent(D: DomainSpec, seg: InitialSegment, cfg: NilpotentSampleConfig) -> MatTuple:
    """Random Λ-nilpotent point of D, scaled to ``gauge = 1 - cfg.margin``."""
    if D.ntuple != seg.d:
        raise ValueError(f"domain takes {D.ntuple}-tuples, segment has alphabet size {seg.d}")
    if len(seg) == 0:
        raise ValueError("no nonzero tuple is nilpotent for the empty segment")
    if cfg.strategy != "graded_random" and cfg.n_max < len(seg):
        raise ValueError(f"n_max={cfg.n_max} is smaller than |Λ|={len(seg)}")
    rng = np.random.default_rng(cfg.seed)
    return _sample(D, seg, cfg.strategy, rng, cfg)


def _sample(D, seg, strategy, rng, cfg) -> MatTuple:
    if strategy == "weighted_shift":
        fam = shift_family(seg)
        return to_level(D, fam.build(fam.random_params(rng)), cfg.margin)
    if strategy == "graded_random":
        if not seg.is_ball():
            raise ValueError("graded sampling needs a ball segment Λ(ℓ)")
        fam = graded_family(seg.d, _graded_dims(rng, seg, cfg.n_max, cfg.max_block))
        return to_level(D, fam.build(fam.random_params(rng)), cfg.margin)
    if strategy == "unitary_conjugated":
        X = _sample(D, seg, "weighted_shift", rng, cfg)
        return conjugate_isometry(X, random_unitary(rng, X.n))
    # direct_sum_mix
    parts = ["weighted_shift", "unitary_conjugated"]
    if seg.is_ball():
        parts.append("graded_random")
    out, size = None, 0
    for s in parts:
        X = _sample(D, seg, s, rng, cfg)
        if out is not None and size + X.n > cfg.n_max:
            continue
        out = X if out is None else direct_sum(out, X)
        size += X.n
    return out


# -- compression -------------------------------------------------------------


def compress(T: MatTuple, V: np.ndarray, t: float) -> MatTuple:
    """``t · (V*T_1V, ..., V*T_dV)`` for an isometry V into T's space."""
    if not 0 <= t < 1:
        raise ValueError("t must lie in [0, 1)")
    return conjugate_isometry(T, V).scale(t)


def cyclic_subspace(T: MatTuple, seg: InitialSegment, vectors, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as an isometry) of ``span{T^w h : w ∈ Λ, h ∈ vectors}``."""
    H = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if H.shape[0] != T.n:
        H = H.T
    powers = word_powers(T, seg.ordered)
    K = np.concatenate([powers[w] @ H for w in seg.ordered], axis=1)
    u, s, _ = np.linalg.svd(K, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    V = u[:, :rank]
    if rank == 0:
        raise NotIsometry("the cyclic subspace is trivial")
    return V
