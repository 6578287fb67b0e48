"""Randomized invariant suites behind ``nccf selftest``.

Each property draws its own generator from the run seed, so results do not
depend on which other properties ran. Module attributes are looked up at
call time (``ncpoly.convolve`` rather than an imported name) so that a
patched implementation is what gets tested.
"""

from __future__ import annotations

import numpy as np

from . import cfp, domains, fock, freewords, ncpoly, nilpotent
from .ncpoly import MatPoly, MatTuple, opnorm

LEVELS = {"quick": 1, "full": 10}


def _random_domain(rng):
    kind = int(rng.integers(3))
    if kind == 0:
        return domains.polydisc(int(rng.integers(1, 4)))
    if kind == 1:
        return domains.rowball(float(rng.uniform(0.3, 2.0)), int(rng.integers(1, 4)))
    return domains.mixedball(int(rng.integers(1, 3)), int(rng.integers(1, 3)))


def _random_tuple(rng, d, n, scale=1.0):
    return MatTuple(scale * domains.ginibre(rng, (d, n, n)))


def _random_word(rng, d, max_len):
    return tuple(int(k) for k in rng.integers(1, d + 1, size=int(rng.integers(0, max_len + 1))))


# -- properties ---------------------------------------------------------------


def concat_monoid(rng, trials, grid):
    for _ in range(10 * trials):
        d = int(rng.integers(1, 4))
        u, v, w = (_random_word(rng, d, 4) for _ in range(3))
        cat = freewords.concat
        assert cat(cat(u, v), w) == cat(u, cat(v, w))
        assert cat(freewords.EMPTY, u) == u == cat(u, freewords.EMPTY)
        assert len(cat(u, v)) == len(u) + len(v)


def ball_segment_size(rng, trials, grid):
    for d in (1, 2, 3):
        for ell in range(4):
            seg = freewords.ball_segment(d, ell)
            assert len(seg) == sum(d**j for j in range(ell + 1))
            freewords.validate_initial_segment(d, seg.words)


def ideal_closure(rng, trials, grid):
    for _ in range(5 * trials):
        d = int(rng.integers(1, 4))
        seg = freewords.random_segment(rng, d, 3)
        L = seg.max_length
        for u in freewords.iter_words(d, L + 1):
            if u in seg:
                continue
            for v in freewords.iter_words(d, 1):
                if len(u) + len(v) <= L + 1:
                    assert u + v not in seg and v + u not in seg


def evaluation_linearity(rng, trials, grid):
    for _ in range(5 * trials):
        d, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        f = MatPoly.random(rng, d, 3, 2, 2, density=0.5)
        g = MatPoly.random(rng, d, 3, 2, 2, density=0.5)
        X = _random_tuple(rng, d, n, 0.5)
        a = complex(*rng.standard_normal(2))
        ev = ncpoly.evaluate
        assert np.allclose(ev(f + g, X), ev(f, X) + ev(g, X), atol=1e-10)
        assert np.allclose(ev(a * f, X), a * ev(f, X), atol=1e-10)


def product_homomorphism(rng, trials, grid):
    for _ in range(10 * trials):
        d, n = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        p, q, r = (int(k) for k in rng.integers(1, 3, size=3))
        f = MatPoly.random(rng, d, int(rng.integers(0, 5)), p, q, density=0.4)
        g = MatPoly.random(rng, d, int(rng.integers(0, 5)), q, r, density=0.4)
        X = _random_tuple(rng, d, n, 0.4)
        fX, gX = ncpoly.evaluate(f, X), ncpoly.evaluate(g, X)
        err = opnorm(ncpoly.evaluate(ncpoly.convolve(f, g), X) - fX @ gX)
        assert err <= 1e-9 * (1 + opnorm(fX) * opnorm(gX)), err


def direct_sum_max(rng, trials, grid):
    for _ in range(5 * trials):
        d, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        f = MatPoly.random(rng, d, 2, 1, 2)
        g = MatPoly.random(rng, d, 2, 2, 1)
        X = _random_tuple(rng, d, n, 0.5)
        lhs = opnorm(ncpoly.evaluate(f.direct_sum(g), X))
        rhs = max(opnorm(ncpoly.evaluate(f, X)), opnorm(ncpoly.evaluate(g, X)))
        assert abs(lhs - rhs) <= 1e-10 * max(1, rhs)


def matrix_norm_bimodule(rng, trials, grid):
    for _ in range(5 * trials):
        d, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        f = MatPoly.random(rng, d, 2, 2, 3)
        A, B = domains.ginibre(rng, (3, 2)), domains.ginibre(rng, (3, 2))
        X = _random_tuple(rng, d, n, 0.5)
        lhs = opnorm(ncpoly.evaluate(f.sandwich(A, B), X))
        assert lhs <= opnorm(A) * opnorm(ncpoly.evaluate(f, X)) * opnorm(B) * (1 + 1e-12) + 1e-12


def cauchy_estimate(rng, trials, grid):
    for _ in range(5 * trials):
        D = _random_domain(rng)
        f = MatPoly.random(rng, D.ntuple, int(rng.integers(0, 5)), 2, 2, density=0.5)
        X = _random_tuple(rng, D.ntuple, int(rng.integers(1, 4)))
        r = 0.8 * domains.scaling_radius(D, X)
        ncpoly.cauchy_bound_check(f, X, r, grid, 1e-8)


def fock_coisometry(rng, trials, grid):
    for d in (1, 2, 3):
        for ell in range(5):
            S = fock.creation_truncated(d, ell)
            total = sum(s @ s.conj().T for s in S)
            assert np.array_equal(total, fock.vacuum_projection_complement(S.n))


def fock_row_norm(rng, trials, grid):
    for d in (1, 2, 3):
        for ell in range(1, 4):
            t = float(rng.uniform(0.1, 1.0))
            assert abs(domains.row_norm(fock.creation_truncated(d, ell).scale(t)) - t) <= 1e-12


def coefficient_extraction(rng, trials, grid):
    for _ in range(3 * trials):
        d = int(rng.integers(1, 3))
        f = MatPoly.random(rng, d, int(rng.integers(0, 4)), 2, 2, density=0.5)
        for w, c in f.coeffs.items():
            assert np.allclose(fock.coeff_extract(f, w, 0.5), c, rtol=0, atol=1e-10)


def coefficient_decay(rng, trials, grid):
    for _ in range(3 * trials):
        D = _random_domain(rng)
        f = MatPoly.random(rng, D.ntuple, int(rng.integers(0, 4)), 1, 2, density=0.5)
        fock.coeff_decay_check(f, D.inner_radius, grid, 1e-10)


def domain_closure(rng, trials, grid):
    for _ in range(5 * trials):
        D = _random_domain(rng)
        X = domains.sample(D, int(rng.integers(1, 4)), rng, 0.1)
        Y = domains.sample(D, int(rng.integers(1, 4)), rng, 0.1)
        assert domains.member(D, domains.direct_sum(X, Y))
        m = X.n + Y.n
        V = domains.random_isometry(rng, m, int(rng.integers(1, m + 1)))
        assert domains.member(D, domains.conjugate_isometry(domains.direct_sum(X, Y), V))


def circled_domain(rng, trials, grid):
    for _ in range(3 * trials):
        D = _random_domain(rng)
        X = domains.sample(D, 3, rng, float(rng.uniform(1e-3, 0.5)))
        for th in 2 * np.pi * np.arange(16) / 16:
            assert domains.member(D, X.scale(np.exp(1j * th)))


def domain_convexity(rng, trials, grid):
    for _ in range(3 * trials):
        D = _random_domain(rng)
        X = domains.sample(D, 3, rng, 0.05)
        Y = domains.sample(D, 3, rng, 0.05)
        for t in np.linspace(0, 1, 5):
            assert domains.member(D, X.scale(t) + Y.scale(1 - t))


def domain_sandwich(rng, trials, grid):
    for _ in range(5 * trials):
        D = _random_domain(rng)
        X = _random_tuple(rng, D.ntuple, 3)
        s = domains.row_norm(X)
        inner = X.scale(float(rng.uniform(0.01, 0.999)) * D.inner_radius / s)
        assert domains.member(D, inner)
        Y = domains.sample(D, 3, rng, float(rng.uniform(1e-3, 0.9)))
        assert domains.row_norm(Y) < D.outer_radius


def scaling_homogeneity(rng, trials, grid):
    for _ in range(5 * trials):
        D = _random_domain(rng)
        X = _random_tuple(rng, D.ntuple, 3)
        c = float(rng.uniform(0.1, 10))
        r = domains.scaling_radius(D, X)
        assert abs(domains.scaling_radius(D, X.scale(c)) - r / c) <= 1e-12 * r / c
        assert domains.member(D, X.scale(0.999 * r)) and not domains.member(D, X.scale(1.001 * r))


def nilpotent_samplers(rng, trials, grid):
    for _ in range(3 * trials):
        D = _random_domain(rng)
        seg = (freewords.ball_segment(D.ntuple, int(rng.integers(0, 3)))
               if rng.random() < 0.5 else freewords.random_segment(rng, D.ntuple, 3))
        for strategy in nilpotent.STRATEGIES:
            if strategy == "graded_random" and not seg.is_ball():
                continue
            cfg = nilpotent.NilpotentSampleConfig(strategy, n_max=64, seed=int(rng.integers(2**31)))
            X = nilpotent.sample_nilpotent(D, seg, cfg)
            assert domains.member(D, X), strategy
            assert nilpotent.is_lambda_nilpotent(X, seg, 1e-12), strategy


def compression(rng, trials, grid):
    for _ in range(5 * trials):
        D = _random_domain(rng)
        T = _random_tuple(rng, D.ntuple, int(rng.integers(2, 5)))
        T = T.scale(domains.scaling_radius(D, T))
        V = domains.random_isometry(rng, T.n, int(rng.integers(1, T.n + 1)))
        assert domains.member(D, nilpotent.compress(T, V, 0.99))


def schur_oracle(rng, trials, grid):
    for _ in range(3 * trials):
        n = int(rng.integers(0, 9))
        q = 1 if rng.random() < 0.6 else int(rng.integers(2, 4))
        c = [domains.ginibre(rng, (q, q)) * 0.5 for _ in range(n + 1)]
        p, seg, D = cfp.classical_problem(c)
        cert = cfp.nilpotent_norm(p, seg, D, cfp.OptimizerConfig(restarts=2, max_iter=50,
                                                                 seed=int(rng.integers(2**31))))
        ref = cfp.toeplitz_norm(c)
        assert abs(cert.value - ref) <= 1e-6 * max(1.0, ref), (cert.value, ref)


def phi_lmi_equivalence(rng, trials, grid):
    for _ in range(50 * trials):
        d, k, n = (int(v) for v in rng.integers(1, 4, size=3))
        L = cfp.Pencil(domains.ginibre(rng, (d, k, k)))
        X = _random_tuple(rng, d, n, float(rng.uniform(0.05, 1.0)))
        lam = cfp.lmi_check(L, X)
        if abs(lam) <= 1e-9:
            continue
        try:
            contractive = opnorm(cfp.phi_transform(L, X)) < 1
        except cfp.SingularResolvent:
            contractive = False
        assert (lam > 0) == contractive
        if cfp.circled_lmi_sweep(L, X, max(grid // 8, 8)) > 0:
            assert cfp.spectral_radius(L, X) < 1


def witness_soundness(rng, trials, grid):
    p = MatPoly.from_scalars(2, {(1,): 1, (2,): 1})
    seg, D = freewords.ball_segment(2, 1), domains.polydisc(2)
    cert = cfp.nilpotent_norm(p, seg, D, cfp.OptimizerConfig(restarts=8, seed=int(rng.integers(2**31))))
    assert cfp.verify_witness(p, seg, D, cert)
    assert cert.value >= 2 - 1e-3, cert.value


PROPERTIES = [
    ("concat-monoid", concat_monoid),
    ("ball-segment-size", ball_segment_size),
    ("ideal-closure", ideal_closure),
    ("evaluation-linearity", evaluation_linearity),
    ("product-homomorphism", product_homomorphism),
    ("direct-sum-max", direct_sum_max),
    ("matrix-norm-bimodule", matrix_norm_bimodule),
    ("cauchy-estimate", cauchy_estimate),
    ("fock-coisometry", fock_coisometry),
    ("fock-row-norm", fock_row_norm),
    ("coefficient-extraction", coefficient_extraction),
    ("coefficient-decay", coefficient_decay),
    ("domain-closure", domain_closure),
    ("circled-domain", circled_domain),
    ("domain-convexity", domain_convexity),
    ("domain-sandwich", domain_sandwich),
    ("scaling-homogeneity", scaling_homogeneity),
    ("nilpotent-samplers", nilpotent_samplers),
    ("compression", compression),
    ("schur-oracle", schur_oracle),
    ("phi-lmi-equivalence", phi_lmi_equivalence),
    ("witness-soundness", witness_soundness),
]


def run(seed: int = 0, level: str = "quick", grid: int = 512, on_result=None) -> dict:
    """Run every property and return a JSON-ready summary.

    Timing is left out of the summary so that equal seeds give equal bytes.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}")
    trials = LEVELS[level]
    children = np.random.SeedSequence(seed).spawn(len(PROPERTIES))
    results, first = [], None
    for (name, prop), ss in zip(PROPERTIES, children):
        try:
            prop(np.random.default_rng(ss), trials, grid)
            ok, msg = True, None
        except Exception as exc:  # any failure, including crashes, fails the property
            ok, msg = False, f"{type(exc).__name__}: {exc}"
        entry = {"name": name, "passed": ok}
        if msg:
            entry["error"] = msg
        results.append(entry)
        if on_result is not None:
            on_result(entry)
        if not ok and first is None:
            first = name
    return {"level": level, "seed": seed, "passed": first is None, "first_failure": first, "properties": results}
