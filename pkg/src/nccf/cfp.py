"""The Carathéodory–Fejér criterion value and the tools around it.

The criterion value of ``p`` over a finite initial segment Λ and domain D is

    ρ(p, Λ, D) = sup{ ||p(X)|| : X ∈ D, X Λ-nilpotent },

and a norm-one interpolant with the prescribed Λ-coefficients exists iff
``ρ <= 1``. The sup runs over tuples of every size, so only lower bounds
are computed here: a shift candidate plus multistart local ascent over
structurally nilpotent families. A value above the bound refutes
feasibility together with an explicit witness; a value below it refutes
nothing.

For ``d = 1`` and the unit disc the value is exactly the norm of the
lower-triangular Toeplitz matrix of the coefficients (:func:`schur_matrix`),
which serves as the independent oracle.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .domains import DomainSpec, gauge, member, polydisc, scaling_radius
from .errors import DimensionMismatch, ShapeMismatch, SingularResolvent, UnsupportedSupport
from .fock import lambda_shift
from .freewords import InitialSegment, ball_segment, format_word
from .ncpoly import MatPoly, MatTuple, evaluate, matrix_to_json, opnorm
from .nilpotent import (
    PatternFamily,
    graded_family,
    is_lambda_nilpotent,
    nilpotency_residual,
    shift_family,
)

log = logging.getLogger(__name__)

INFEASIBLE = "infeasible"
NOT_REFUTED = "not-refuted"


# -- classical oracle ------------------------------------------------------------


def schur_matrix(c) -> np.ndarray:
    """Block lower-triangular Toeplitz matrix with ``c_k`` on the k-th subdiagonal.

    Entries of ``c`` may be scalars or equally shaped p×q blocks.
    """
    blocks = [np.atleast_2d(np.asarray(ck, dtype=complex)) for ck in c]
    if not blocks:
        raise ValueError("need at least one coefficient")
    p, q = blocks[0].shape
    if any(b.shape != (p, q) for b in blocks):
        raise ShapeMismatch("coefficient blocks differ in shape")
    m = len(blocks)
    out = np.zeros((m * p, m * q), dtype=complex)
    for i in range(m):
        for j in range(i + 1):
            out[i * p:(i + 1) * p, j * q:(j + 1) * q] = blocks[i - j]
    return out


def toeplitz_norm(c) -> float:
    return opnorm(schur_matrix(c))


def classical_problem(c) -> tuple[MatPoly, InitialSegment, DomainSpec]:
    """The one-variable problem ``p = Σ c_k g1^k`` over ``Λ(n)`` and the unit disc."""
    blocks = [np.atleast_2d(np.asarray(ck, dtype=complex)) for ck in c]
    p, q = blocks[0].shape
    poly = MatPoly(1, p, q, {(1,) * k: b for k, b in enumerate(blocks)})
    return poly, ball_segment(1, len(blocks) - 1), polydisc(1)


# -- norm certificate ------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iter: int = 500
    fd_step: float = 1e-3
    init_step: float = 0.25
    min_step: float = 1e-12
    rel_tol: float = 1e-9
    margin: float = 1e-6
    shift_eps: float = 1e-9
    max_block: int = 2
    seed: int = 0
    jobs: int = 1


@dataclass
class NormCertificate:
    value: float
    witness: MatTuple | None
    method: str
    iterations: int = 0
    residual: float = 0.0
    seed: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "value": self.value,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
        }
        if self.witness is not None:
            out["witness"] = tuple_to_json(self.witness)
        return out


def tuple_to_json(X: MatTuple) -> dict:
    return {"n": X.n, "matrices": [matrix_to_json(x) for x in X]}


def _check_problem(p: MatPoly, seg: InitialSegment, D: DomainSpec):
    if not (p.d == seg.d == D.ntuple):
        raise DimensionMismatch(
            f"polynomial in {p.d} variables, segment over {seg.d} letters, domain of {D.ntuple}-tuples"
        )
    if len(seg) == 0:
        raise ValueError("the empty segment admits no nilpotent points")
    outside = [w for w in p.coeffs if w not in seg.words]
    if outside:
        raise UnsupportedSupport(
            "coefficients outside the segment: " + ", ".join(format_word(w) for w in outside)
        )


def shift_candidate(p: MatPoly, seg: InitialSegment, D: DomainSpec, eps: float = 1e-9) -> tuple[float, MatTuple]:
    """``||p(t S_Λ)||`` with ``t = (1 - eps) · scaling_radius(S_Λ)``."""
    S = lambda_shift(seg)
    r = scaling_radius(D, S)
    X = S if math.isinf(r) else S.scale((1 - eps) * r)
    return opnorm(evaluate(p, X)), X


class _Objective:
    def __init__(self, p: MatPoly, fam: PatternFamily, D: DomainSpec, margin: float):
        self.p, self.fam, self.D, self.margin = p, fam, D, margin

    def __call__(self, theta) -> float:
        return opnorm(evaluate(self.p, self.fam.build(theta)))

    def project(self, theta):
        g = gauge(self.D, self.fam.build(theta))
        lim = 1 - self.margin
        return theta if g <= lim else theta * (lim / g)

    def gradient(self, theta, h):
        g = np.empty_like(theta)
        e = np.zeros_like(theta)
        for i in range(theta.size):
            e[i] = h
            g[i] = (self(theta + e) - self(theta - e)) / (2 * h)
            e[i] = 0.0
        return g


def local_ascent(obj: _Objective, theta0: np.ndarray, cfg: OptimizerConfig):
    """Normalized finite-difference ascent with backtracking and re-projection.

    Steps along ``grad/||grad||`` so the path is invariant under scaling of
    the polynomial. Each accepted step strictly increases the objective.
    """
    theta = obj.project(np.asarray(theta0, dtype=float))
    val = obj(theta)
    step = cfg.init_step
    it = 0
    while it < cfg.max_iter and theta.size:
        it += 1
        g = obj.gradient(theta, cfg.fd_step)
        gn = np.linalg.norm(g)
        if gn == 0 or not np.isfinite(gn):
            break
        direction = g / gn
        accepted = False
        while step >= cfg.min_step:
            cand = obj.project(theta + step * direction)
            cval = obj(cand)
            if cval > val:
                accepted = True
                break
            step /= 2
        if not accepted:
            break
        gain = (cval - val) / max(abs(val), 1e-300)
        theta, val = cand, cval
        step = min(2 * step, 4.0)
        if gain < cfg.rel_tol:
            break
    return theta, val, it


def _start(seg: InitialSegment, cfg: OptimizerConfig, index: int, rng: np.random.Generator):
    if index == 0:
        fam = shift_family(seg)
        return fam, np.concatenate([np.ones(fam.ncomplex), np.zeros(fam.ncomplex)])
    if seg.is_ball() and index % 2 == 1:
        dims = rng.integers(1, cfg.max_block + 1, size=seg.max_length + 1)
        fam = graded_family(seg.d, dims)
    else:
        sizes = {w: int(rng.integers(1, cfg.max_block + 1)) for w in seg.ordered}
        fam = shift_family(seg, sizes)
    return fam, fam.random_params(rng)


def _run_restart(args):
    p, seg, D, cfg, index, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    fam, theta0 = _start(seg, cfg, index, rng)
    obj = _Objective(p, fam, D, cfg.margin)
    theta, val, it = local_ascent(obj, theta0, cfg)
    return index, val, fam.build(theta), it


def nilpotent_norm(p: MatPoly, seg: InitialSegment, D: DomainSpec, cfg: OptimizerConfig | None = None) -> NormCertificate:
    """Best lower bound for ρ(p, Λ, D) with a verified witness.

    Candidates are the shift ``t S_Λ`` and one local ascent per restart.
    Restart 0 starts from the shift itself; the others from random
    block-weighted shifts or (for ball segments) random graded tuples.
    The maximum wins; ties go to the shift, then to the lowest restart.
    """
    cfg = cfg or OptimizerConfig()
    _check_problem(p, seg, D)
    shift_val, shift_X = shift_candidate(p, seg, D, cfg.shift_eps)
    best = (shift_val, -1, shift_X, 0)

    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    tasks = [(p, seg, D, cfg, i, seeds[i]) for i in range(cfg.restarts)]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_run_restart, tasks))
    else:
        results = [_run_restart(t) for t in tasks]

    opt_val = -math.inf
    total_it = 0
    for index, val, X, it in sorted(results, key=lambda r: r[0]):
        total_it += it
        opt_val = max(opt_val, val)
        if val > best[0]:
            best = (val, index, X, it)
    _, index, W, _ = best
    value = opnorm(evaluate(p, W))
    residual = nilpotency_residual(W, seg)
    log.debug("shift %.12g optimizer %.12g -> restart %d", shift_val, opt_val, index)
    return NormCertificate(
        value=value,
        witness=W,
        method="shift" if index < 0 else "optimizer",
        iterations=total_it,
        residual=residual,
        seed=cfg.seed,
        diagnostics={
            "shift_value": shift_val,
            "optimizer_value": None if opt_val == -math.inf else opt_val,
            "restart": index,
            "restarts": cfg.restarts,
            "gauge": gauge(D, W),
        },
    )


def oracle_certificate(c) -> NormCertificate:
    """Exact criterion value for one variable on the unit disc, witness-free."""
    return NormCertificate(value=toeplitz_norm(c), witness=None, method="oracle")


def verify_witness(p: MatPoly, seg: InitialSegment, D: DomainSpec, cert: NormCertificate,
                   tol: float = 1e-12) -> bool:
    """Independent re-check: strict membership, nilpotency and the reported value."""
    W = cert.witness
    if W is None:
        return False
    return (
        member(D, W)
        and is_lambda_nilpotent(W, seg, tol)
        and abs(opnorm(evaluate(p, W)) - cert.value) <= 1e-10 * max(1.0, cert.value)
    )


@dataclass
class Verdict:
    verdict: str
    value: float
    bound: float
    certificate: NormCertificate
    tol: float

    @property
    def infeasible(self) -> bool:
        return self.verdict == INFEASIBLE

    def to_json(self) -> dict:
        out = self.certificate.to_json()
        out.update({"verdict": self.verdict, "bound": self.bound, "tol": self.tol})
        return out


def feasibility(p: MatPoly, seg: InitialSegment, D: DomainSpec, bound: float = 1.0,
                cfg: OptimizerConfig | None = None, tol: float = 1e-9) -> Verdict:
    """Refute feasibility of the interpolation problem, or report the value found.

    INFEASIBLE means a Λ-nilpotent witness in D with ``||p(X)|| > bound (1 + tol)``
    was found, so no interpolant of norm ``<= bound`` exists. NOT-REFUTED
    carries the best value found and proves nothing.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    cert = nilpotent_norm(p, seg, D, cfg)
    verdict = INFEASIBLE if cert.value > bound * (1 + tol) else NOT_REFUTED
    return Verdict(verdict, cert.value, bound, cert, tol)


# -- linear pencils ----------------------------------------------------------------


@dataclass(frozen=True)
class Pencil:
    """``L = Σ A_j g_j`` with k×k coefficients, stored as a (d, k, k) array."""

    A: np.ndarray

    def __post_init__(self):
        a = np.array(self.A, dtype=complex)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise ShapeMismatch(f"pencil coefficients must be (d, k, k), got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "A", a)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]

    def __call__(self, X: MatTuple) -> np.ndarray:
        if X.d != self.d:
            raise DimensionMismatch(f"pencil in {self.d} variables applied to a {X.d}-tuple")
        return sum(np.kron(a, x) for a, x in zip(self.A, X))

    def as_poly(self) -> MatPoly:
        return MatPoly(self.d, self.k, self.k, {(j + 1,): a for j, a in enumerate(self.A)})


def phi_transform(L: Pencil, X: MatTuple, max_cond: float = 1e12) -> np.ndarray:
    """``Φ_L(X) = L(X) (2 - L(X))^{-1}``."""
    Y = L(X)
    M = 2 * np.eye(Y.shape[0]) - Y
    c = np.linalg.cond(M)
    if not np.isfinite(c) or c > max_cond:
        raise SingularResolvent(f"2 - L(X) is numerically singular (cond {c:.3g})")
    return np.linalg.solve(M, Y)


def phi_series(L: Pencil, X: MatTuple, terms: int) -> np.ndarray:
    """Partial sum ``Σ_{j<terms} L(X)^{j+1} / 2^{j+1}``."""
    Y = L(X)
    out = np.zeros_like(Y)
    term = np.eye(Y.shape[0], dtype=complex)
    for _ in range(terms):
        term = term @ Y / 2
        out += term
    return out


def lmi_check(L: Pencil, X: MatTuple) -> float:
    """``λ_min(2 - L(X) - L(X)*)``; positive iff the strict LMI holds."""
    Y = L(X)
    return float(np.linalg.eigvalsh(2 * np.eye(Y.shape[0]) - Y - Y.conj().T)[0])


def _rotated_lmin(Y: np.ndarray, theta: float) -> float:
    Z = np.exp(1j * theta) * Y
    return float(np.linalg.eigvalsh(2 * np.eye(Y.shape[0]) - Z - Z.conj().T)[0])


def circled_lmi_sweep(L: Pencil, X: MatTuple, grid: int = 64, refine: bool = True) -> float:
    """``min_θ λ_min(2 - e^{iθ}L(X) - e^{-iθ}L(X)*)`` over a θ grid.

    With ``refine`` the three smallest grid values are polished by a
    bounded scalar search on the neighbouring cells, so a positive result
    certifies the inequality between grid points as well, and with it
    ``spectral_radius(L(X)) < 1``.
    """
    if grid < 8:
        raise ValueError("grid must be >= 8")
    Y = L(X)
    thetas = 2 * np.pi * np.arange(grid) / grid
    vals = np.array([_rotated_lmin(Y, t) for t in thetas])
    best = float(vals.min())
    if refine:
        h = 2 * np.pi / grid
        for i in np.argsort(vals)[:3]:
            res = minimize_scalar(
                lambda t: _rotated_lmin(Y, t),
                bounds=(thetas[i] - h, thetas[i] + h),
                method="bounded",
                options={"xatol": 1e-12},
            )
            best = min(best, float(res.fun))
    return best


def spectral_radius(L: Pencil, X: MatTuple) -> float:
    return float(np.abs(np.linalg.eigvals(L(X))).max())


def with_seed(cfg: OptimizerConfig, seed: int) -> OptimizerConfig:
    return replace(cfg, seed=seed)
