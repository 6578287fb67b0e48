"""Matrix-coefficient nc polynomials and their evaluation on matrix tuples.

A polynomial ``f = Σ f_w w`` with ``p×q`` coefficients is evaluated at a
tuple ``X`` of ``n×n`` matrices as ``f(X) = Σ_w f_w ⊗ X^w``, a
``(p·n)×(q·n)`` matrix. Sums are formed degree by degree.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from types import MappingProxyType

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionMismatch, ShapeMismatch, ViolationError
from .freewords import EMPTY, Word, format_word, length_lex_key, parse_word


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def opnorm(a: np.ndarray) -> float:
    """Largest singular value (0 for empty matrices)."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


class MatTuple:
    """A d-tuple of n×n complex matrices, stored as a read-only (d, n, n) array."""

    __slots__ = ("matrices",)
    # keep numpy scalars from broadcasting over the tuple in ``t * X``
    __array_ufunc__ = None

    def __init__(self, matrices):
        a = np.array(matrices, dtype=complex)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise DimensionMismatch(f"expected shape (d, n, n), got {a.shape}")
        a.setflags(write=False)
        self.matrices = a

    def __reduce__(self):
        return (MatTuple, (np.array(self.matrices),))

    @classmethod
    def zeros(cls, d: int, n: int) -> MatTuple:
        return cls(np.zeros((d, n, n)))

    @property
    def d(self) -> int:
        return self.matrices.shape[0]

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    def __getitem__(self, j):
        return self.matrices[j]

    def __len__(self):
        return self.d

    def __iter__(self):
        return iter(self.matrices)

    def scale(self, s) -> MatTuple:
        return MatTuple(s * self.matrices)

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def __add__(self, other: MatTuple) -> MatTuple:
        return MatTuple(self.matrices + other.matrices)

    def __sub__(self, other: MatTuple) -> MatTuple:
        return MatTuple(self.matrices - other.matrices)

    def row(self) -> np.ndarray:
        """The n×(d·n) row ``[X_1 ... X_d]``."""
        return np.concatenate(list(self.matrices), axis=1)

    def __repr__(self):
        return f"MatTuple(d={self.d}, n={self.n})"


class MatPoly:
    """Finitely supported map from words to p×q complex matrices.

    Exactly-zero coefficients are dropped at construction; nothing else is
    pruned.
    """

    __array_ufunc__ = None

    __slots__ = ("d", "p", "q", "coeffs")

    def __init__(self, d: int, p: int, q: int, coeffs: Mapping | Iterable = ()):
        if d < 1 or p < 1 or q < 1:
            raise ValueError("d, p, q must be positive")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        out = {}
        for w, c in items:
            w = parse_word(w, d) if isinstance(w, str) else tuple(int(k) for k in w)
            if any(k < 1 or k > d for k in w):
                raise ValueError(f"letter out of range in {format_word(w)}")
            c = np.array(c, dtype=complex).reshape(p, q) if np.ndim(c) == 0 else np.array(c, dtype=complex)
            if c.shape != (p, q):
                raise ShapeMismatch(f"coefficient at {format_word(w)} has shape {c.shape}, expected {(p, q)}")
            if w in out:
                c = out[w] + c
            out[w] = c
        self.d, self.p, self.q = d, p, q
        self.coeffs = MappingProxyType(
            {w: _frozen(c) for w, c in sorted(out.items(), key=lambda kv: length_lex_key(kv[0])) if np.any(c != 0)}
        )

    def __reduce__(self):
        return (MatPoly, (self.d, self.p, self.q, dict(self.coeffs)))

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, d: int, c) -> MatPoly:
        c = np.atleast_2d(np.asarray(c, dtype=complex))
        return cls(d, c.shape[0], c.shape[1], {EMPTY: c})

    @classmethod
    def monomial(cls, d: int, w: Word | str, c=1.0) -> MatPoly:
        c = np.atleast_2d(np.asarray(c, dtype=complex))
        return cls(d, c.shape[0], c.shape[1], {w: c})

    @classmethod
    def from_scalars(cls, d: int, coeffs: Mapping) -> MatPoly:
        return cls(d, 1, 1, {w: [[c]] for w, c in coeffs.items()})

    @classmethod
    def random(cls, rng: np.random.Generator, d: int, degree: int, p: int = 1, q: int = 1, density: float = 1.0) -> MatPoly:
        """Gaussian coefficients on a random subset of words of length <= degree."""
        from .freewords import iter_words

        coeffs = {}
        for w in iter_words(d, degree):
            if rng.random() <= density:
                coeffs[w] = (rng.standard_normal((p, q)) + 1j * rng.standard_normal((p, q))) / np.sqrt(2)
        return cls(d, p, q, coeffs)

    # -- structure --------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.p, self.q)

    @property
    def support(self) -> list[Word]:
        return list(self.coeffs)

    @property
    def degree(self) -> int:
        """Largest word length in the support, ``-1`` for the zero polynomial."""
        return max((len(w) for w in self.coeffs), default=-1)

    def coeff(self, w: Word | str) -> np.ndarray:
        w = parse_word(w, self.d) if isinstance(w, str) else tuple(w)
        c = self.coeffs.get(w)
        return np.zeros((self.p, self.q), dtype=complex) if c is None else c

    def _check_same(self, other: MatPoly):
        if self.d != other.d or self.shape != other.shape:
            raise ShapeMismatch("polynomials differ in d or coefficient shape")

    def __add__(self, other: MatPoly) -> MatPoly:
        self._check_same(other)
        return MatPoly(self.d, self.p, self.q, list(self.coeffs.items()) + list(other.coeffs.items()))

    def __neg__(self) -> MatPoly:
        return MatPoly(self.d, self.p, self.q, {w: -c for w, c in self.coeffs.items()})

    def __sub__(self, other: MatPoly) -> MatPoly:
        return self + (-other)

    def __mul__(self, alpha) -> MatPoly:
        if isinstance(alpha, MatPoly):
            return convolve(self, alpha)
        return MatPoly(self.d, self.p, self.q, {w: alpha * c for w, c in self.coeffs.items()})

    def __rmul__(self, alpha) -> MatPoly:
        return self * alpha

    def __matmul__(self, other: MatPoly) -> MatPoly:
        return convolve(self, other)

    def scaled_degrees(self, r: float) -> MatPoly:
        """``f_r = Σ r^{|w|} f_w w``."""
        return MatPoly(self.d, self.p, self.q, {w: r ** len(w) * c for w, c in self.coeffs.items()})

    def sandwich(self, A: np.ndarray, B: np.ndarray) -> MatPoly:
        """Coefficientwise ``A f_w B``."""
        A, B = np.atleast_2d(A), np.atleast_2d(B)
        return MatPoly(self.d, A.shape[0], B.shape[1], {w: A @ c @ B for w, c in self.coeffs.items()})

    def direct_sum(self, other: MatPoly) -> MatPoly:
        """Block-diagonal polynomial with coefficients ``f_w ⊕ g_w``."""
        if self.d != other.d:
            raise ShapeMismatch("polynomials over different alphabets")
        words = set(self.coeffs) | set(other.coeffs)
        return MatPoly(
            self.d, self.p + other.p, self.q + other.q,
            {w: block_diag(self.coeff(w), other.coeff(w)) for w in words},
        )

    def allclose(self, other: MatPoly, atol: float = 1e-12) -> bool:
        if self.d != other.d or self.shape != other.shape:
            return False
        words = set(self.coeffs) | set(other.coeffs)
        return all(np.allclose(self.coeff(w), other.coeff(w), rtol=0, atol=atol) for w in words)

    def __repr__(self):
        return f"MatPoly(d={self.d}, shape={self.shape}, terms={len(self.coeffs)}, degree={self.degree})"

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "q": self.q,
            "terms": [{"word": format_word(w), **matrix_to_json(c)} for w, c in self.coeffs.items()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> MatPoly:
        d, p, q = int(obj["d"]), int(obj["p"]), int(obj["q"])
        terms = []
        for t in obj["terms"]:
            terms.append((parse_word(str(t["word"]), d), matrix_from_json(t)))
        return cls(d, p, q, terms)


def matrix_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: Mapping) -> np.ndarray:
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.ndim != 2 or re.shape != im.shape:
        raise ShapeMismatch("matrix blocks must be 2-D with matching re/im shapes")
    return re + 1j * im


# -- evaluation ---------------------------------------------------------------


def word_eval(X: MatTuple, w: Word) -> np.ndarray:
    """``X^w = X_{i1} X_{i2} ... X_{ik}``; the empty word gives the identity."""
    out = np.eye(X.n, dtype=complex)
    for k in w:
        out = out @ X[k - 1]
    return out


def word_powers(X: MatTuple, words: Iterable[Word]) -> dict[Word, np.ndarray]:
    """``X^w`` for every given word, sharing work along common prefixes."""
    cache: dict[Word, np.ndarray] = {EMPTY: np.eye(X.n, dtype=complex)}

    def get(w):
        m = cache.get(w)
        if m is None:
            m = get(w[:-1]) @ X[w[-1] - 1]
            cache[w] = m
        return m

    for w in words:
        get(w)
    return cache


def _check_eval(f: MatPoly, X: MatTuple):
    if f.d != X.d:
        raise DimensionMismatch(f"polynomial in {f.d} variables evaluated at a {X.d}-tuple")


def homogeneous_parts(f: MatPoly, X: MatTuple) -> list[np.ndarray]:
    """``[A_0, ..., A_deg]`` with ``A_j = Σ_{|w|=j} f_w ⊗ X^w``."""
    _check_eval(f, X)
    powers = word_powers(X, f.coeffs)
    parts = [np.zeros((f.p * X.n, f.q * X.n), dtype=complex) for _ in range(f.degree + 1)]
    for w, c in f.coeffs.items():
        parts[len(w)] += np.kron(c, powers[w])
    return parts


def homogeneous_part(f: MatPoly, X: MatTuple, j: int) -> np.ndarray:
    if j < 0:
        raise ValueError("degree must be >= 0")
    _check_eval(f, X)
    words = [w for w in f.coeffs if len(w) == j]
    powers = word_powers(X, words)
    out = np.zeros((f.p * X.n, f.q * X.n), dtype=complex)
    for w in words:
        out += np.kron(f.coeffs[w], powers[w])
    return out


def evaluate(f: MatPoly, X: MatTuple) -> np.ndarray:
    parts = homogeneous_parts(f, X)
    out = np.zeros((f.p * X.n, f.q * X.n), dtype=complex)
    for a in parts:
        out += a
    return out


def convolve(f: MatPoly, g: MatPoly) -> MatPoly:
    """Convolution product ``fg = Σ_w (Σ_{uv=w} f_u g_v) w``."""
    if f.d != g.d:
        raise ShapeMismatch("polynomials over different alphabets")
    if f.q != g.p:
        raise ShapeMismatch(f"inner shapes differ: {f.shape} times {g.shape}")
    out: dict[Word, np.ndarray] = {}
    for u, a in f.coeffs.items():
        for v, b in g.coeffs.items():
            w = u + v
            if w in out:
                out[w] = out[w] + a @ b
            else:
                out[w] = a @ b
    return MatPoly(f.d, f.p, g.q, out)


# -- contour bounds -------------------------------------------------------------


def _circle_values(parts: list[np.ndarray], grid: int) -> np.ndarray:
    thetas = 2 * np.pi * np.arange(grid) / grid
    stack = np.array(parts)
    phases = np.exp(1j * np.outer(thetas, np.arange(len(parts))))
    F = np.einsum("tj,jab->tab", phases, stack)
    return np.linalg.svd(F, compute_uv=False)[:, 0]


def circle_sup(f: MatPoly, X: MatTuple, grid: int) -> float:
    """``max_θ ||f(e^{iθ} X)||`` over ``grid`` equally spaced angles from 0."""
    if grid < 8:
        raise ValueError("grid must be >= 8")
    parts = homogeneous_parts(f, X)
    if not parts:
        return 0.0
    return float(_circle_values(parts, grid).max())


class CauchyReport:
    """Per-degree margins ``sup - r^j ||A_j||`` of the Cauchy estimate."""

    def __init__(self, sup: float, r: float, terms: list[float], tol: float):
        self.sup = sup
        self.r = r
        self.terms = terms
        self.margins = [sup - t for t in terms]
        self.tol = tol

    @property
    def ok(self) -> bool:
        return all(m >= -self.tol for m in self.margins)

    def to_json(self) -> dict:
        return {"sup": self.sup, "r": self.r, "terms": self.terms, "margins": self.margins, "ok": self.ok}


def cauchy_bound_check(f: MatPoly, X: MatTuple, r: float, grid: int = 512, tol: float = 1e-8) -> CauchyReport:
    """Check ``r^j ||A_j(X)|| <= circle_sup(f, rX, grid)`` for all degrees j.

    With ``grid > deg f`` the discrete Fourier coefficients of
    ``θ ↦ f(e^{iθ} rX)`` are exactly ``r^j A_j``, so the inequality is a
    theorem and a violation means a numerical bug.
    """
    parts = homogeneous_parts(f, X)
    terms = [r**j * opnorm(a) for j, a in enumerate(parts)]
    sup = circle_sup(f, X.scale(r), grid)
    report = CauchyReport(sup, r, terms, tol)
    if not report.ok:
        worst = int(np.argmin(report.margins))
        raise ViolationError(f"Cauchy estimate fails at degree {worst}", report)
    return report


def fourier_coefficient(f: MatPoly, X: MatTuple, j: int, grid: int) -> np.ndarray:
    """Recover ``A_j(X)`` from samples of ``f(e^{iθ}X)`` on the grid.

    Exact (up to rounding) whenever ``grid > deg f``.
    """
    thetas = 2 * np.pi * np.arange(grid) / grid
    acc = 0
    for t in thetas:
        acc = acc + evaluate(f, X.scale(np.exp(1j * t))) * np.exp(-1j * j * t)
    return acc / grid


__all__ = [
    "MatTuple",
    "MatPoly",
    "CauchyReport",
    "opnorm",
    "word_eval",
    "word_powers",
    "evaluate",
    "homogeneous_part",
    "homogeneous_parts",
    "convolve",
    "circle_sup",
    "cauchy_bound_check",
    "fourier_coefficient",
    "matrix_to_json",
    "matrix_from_json",
]
