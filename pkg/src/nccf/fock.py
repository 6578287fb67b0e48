"""Truncated Fock space models: creation operators compressed to a segment.

Basis vectors ``e_w`` are indexed by the words of a segment in length-lex
order, so ``e_∅`` is always index 0.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidKey, ViolationError
from .freewords import EMPTY, InitialSegment, Word, ball_segment, format_word
from .ncpoly import MatPoly, MatTuple, circle_sup, evaluate, homogeneous_part, opnorm


@dataclass(frozen=True)
class FockBasis:
    segment: InitialSegment
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {w: i for i, w in enumerate(self.segment.ordered)})

    @property
    def words(self) -> tuple[Word, ...]:
        return self.segment.ordered

    @property
    def dim(self) -> int:
        return len(self.segment)


def edges(seg: InitialSegment) -> list[tuple[int, Word]]:
    """Pairs ``(j, w)`` with ``w`` and ``g_j w`` both in the segment."""
    return [(j, w) for w in seg.ordered for j in range(1, seg.d + 1) if (j,) + w in seg.words]


def lambda_shift(seg: InitialSegment, weights: Mapping | None = None) -> MatTuple:
    """Weighted creation operators on ``span{e_w : w ∈ Λ}``.

    ``X_j e_w = weight(j, w) e_{g_j w}`` when ``g_j w ∈ Λ`` and 0 otherwise.
    ``weights=None`` means all ones; otherwise missing keys count as 0.
    """
    basis = FockBasis(seg)
    N = basis.dim
    mats = np.zeros((seg.d, N, N), dtype=complex)
    if weights is None:
        for j, w in edges(seg):
            mats[j - 1, basis.index[(j,) + w], basis.index[w]] = 1.0
        return MatTuple(mats)
    for (j, w), c in weights.items():
        w = tuple(w)
        if c == 0:
            continue
        if not 1 <= j <= seg.d or w not in seg.words or (j,) + w not in seg.words:
            raise InvalidKey(f"no edge g{j}·{format_word(w)} inside the segment")
        mats[j - 1, basis.index[(j,) + w], basis.index[w]] = c
    return MatTuple(mats)


def creation_truncated(d: int, ell: int) -> MatTuple:
    """``S(ℓ)``: the creation operators compressed to words of length <= ℓ."""
    return lambda_shift(ball_segment(d, ell))


def vacuum_projection_complement(N: int) -> np.ndarray:
    """``P = I - e_∅ e_∅*`` on an N-dimensional truncated Fock space."""
    P = np.eye(N)
    if N:
        P[0, 0] = 0.0
    return P


def coeff_extract(f: MatPoly, w: Word, t: float) -> np.ndarray:
    """Read ``f_w`` off the matrix of ``f(t S(|w|))``.

    The block column for ``e_∅`` of ``f(tS)`` holds ``t^{|v|} f_v`` in the
    row block for ``e_v``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    w = tuple(w)
    seg = ball_segment(f.d, len(w))
    basis = FockBasis(seg)
    N = basis.dim
    F = evaluate(f, lambda_shift(seg).scale(t))
    rows = np.arange(f.p) * N + basis.index[w]
    cols = np.arange(f.q) * N + basis.index[EMPTY]
    return F[np.ix_(rows, cols)] / t ** len(w)


class DecayReport:
    """Margins for ``t^{|w|}||f_w|| <= ||A_{|w|}(tS)|| <= circle sup``."""

    def __init__(self, t: float, rows: list[dict], tol: float):
        self.t = t
        self.rows = rows
        self.tol = tol

    @property
    def margins(self) -> list[float]:
        return [r["margin"] for r in self.rows]

    @property
    def ok(self) -> bool:
        return all(r["margin"] >= -self.tol and r["contour_margin"] >= -self.tol for r in self.rows)

    def to_json(self) -> dict:
        return {"t": self.t, "rows": self.rows, "ok": self.ok}


def coeff_decay_check(f: MatPoly, gamma: float, grid: int = 64, tol: float = 1e-10) -> DecayReport:
    """Verify the coefficient bound at ``t = 0.99 γ`` for every support word.

    For each ``w`` the degree-|w| slice of ``f(tS(|w|))`` applied to
    ``x ⊗ e_∅`` is ``Σ_{|v|=|w|} t^{|w|} f_v x ⊗ e_v``, whose norm dominates
    ``t^{|w|}||f_w x||``. The slice norm is in turn bounded by the circle
    sup over ``grid`` angles.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    t = 0.99 * gamma
    rows = []
    for w, c in f.coeffs.items():
        X = creation_truncated(f.d, len(w)).scale(t)
        lhs = t ** len(w) * opnorm(c)
        slice_norm = opnorm(homogeneous_part(f, X, len(w)))
        sup = circle_sup(f, X, max(grid, 8, 2 * (f.degree + 1)))
        rows.append({
            "word": format_word(w),
            "lhs": lhs,
            "slice": slice_norm,
            "sup": sup,
            "margin": slice_norm - lhs,
            "contour_margin": sup - slice_norm,
        })
    report = DecayReport(t, rows, tol)
    if not report.ok:
        raise ViolationError("coefficient decay bound violated", report)
    return report
