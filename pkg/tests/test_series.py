"""Series arithmetic: oracles, examples, and the ultrametric property suite."""

from __future__ import annotations

import math

import pytest

from treelin import (
    CompositionError,
    ScalarSeries,
    TruncationMismatch,
    VectorSeries,
    formal_derivative,
    shift_expand,
    weighted_norm,
)
from treelin.series import (
    SeriesFamily,
    abs_degree,
    degree,
    dominates,
    iter_indices,
    multi_binom,
    signed_degree,
    unit_index,
)

from conftest import (
    assert_series_close,
    random_dyadic_vector_series,
    random_scalar_series,
    random_vector_series,
)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def convolve_oracle(f: ScalarSeries, g: ScalarSeries) -> dict:
    """Brute-force Cauchy product over all stored term pairs."""
    out = {}
    for a, ca in f.items():
        for b, cb in g.items():
            if degree(a) + degree(b) <= f.trunc:
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = out.get(k, 0j) + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def compose_oracle(F: VectorSeries, G: VectorSeries) -> VectorSeries:
    """Composition by explicit monomial substitution, no power caching."""
    n, D = F.n, F.trunc
    acc = VectorSeries.zero(n, D)
    for alpha, vec in F.coeff_items():
        power = ScalarSeries.one(n, D)
        for i, e in enumerate(alpha):
            for _ in range(e):
                power = power.multiply(G.components[i])
        acc = acc + VectorSeries([power.scale(c) for c in vec])
    return acc


# ---------------------------------------------------------------------------
# index helpers and valuation
# ---------------------------------------------------------------------------


def test_degree_accessors():
    assert degree((2, 1)) == 3
    assert signed_degree((-2, 3)) == 1
    assert abs_degree((-2, 3)) == 5
    assert dominates((2, 1), (1, 1)) and not dominates((2, 1), (1, 2))
    assert multi_binom((2, 1), (1, 1)) == 2
    assert multi_binom((2, 1), (3, 0)) == 0


def test_valuation_examples():
    z2 = VectorSeries.from_coeffs(1, 6, {(2,): (1.0,)})
    assert z2.valuation() == 2
    zero = VectorSeries.zero(1, 6)
    assert zero.valuation() == math.inf
    assert zero.znorm() == 0.0
    f = VectorSeries.from_coeffs(2, 6, {(1, 0): (3.0, 0), (1, 1): (1.0, 0)})
    assert f.valuation() == 1


def test_truncation_drops_high_terms_silently():
    s = ScalarSeries(1, 2, {(1,): 1.0, (5,): 9.0})
    assert s.get((5,)) == 0
    assert s.get((1,)) == 1.0


def test_mixed_truncation_rejected():
    a = ScalarSeries(1, 3, {(1,): 1.0})
    b = ScalarSeries(1, 4, {(1,): 1.0})
    with pytest.raises(TruncationMismatch):
        a.multiply(b)


# ---------------------------------------------------------------------------
# multiplication
# ---------------------------------------------------------------------------


def test_multiply_simple():
    one_plus = ScalarSeries(1, 2, {(0,): 1.0, (1,): 1.0})
    one_minus = ScalarSeries(1, 2, {(0,): 1.0, (1,): -1.0})
    prod = one_plus.multiply(one_minus)
    assert prod == ScalarSeries(1, 2, {(0,): 1.0, (2,): -1.0})


def test_multiply_valuation_additivity_monomials():
    f = ScalarSeries.monomial(1, 10, (2,))
    g = ScalarSeries.monomial(1, 10, (3,))
    assert f.multiply(g).valuation() == 5


@pytest.mark.parametrize("n", [1, 2])
def test_multiply_matches_convolution_oracle(rng, n):
    for _ in range(10):
        f = random_scalar_series(rng, n, 6, max_degree=3, density=0.8)
        g = random_scalar_series(rng, n, 6, max_degree=3, density=0.8)
        prod = f.multiply(g)
        oracle = convolve_oracle(f, g)
        assert set(prod.support) == set(oracle)
        for k, v in oracle.items():
            assert abs(prod.get(k) - v) <= 1e-12 * max(1.0, abs(v))


def test_multiply_dense_path_matches_dict_path(rng):
    # force both paths on the same data and compare exactly
    f = random_scalar_series(rng, 2, 12, density=1.0)
    g = random_scalar_series(rng, 2, 12, density=1.0)
    import treelin.series as series_mod

    old = series_mod._DENSE_CUTOFF
    try:
        series_mod._DENSE_CUTOFF = 0
        dense = f.multiply(g)
        series_mod._DENSE_CUTOFF = 10 ** 18
        sparse = f.multiply(g)
    finally:
        series_mod._DENSE_CUTOFF = old
    assert_series_close(dense, sparse, rel=1e-13)


def test_multiply_commutative_and_associative(rng):
    f = random_scalar_series(rng, 2, 5, max_degree=3, density=0.7)
    g = random_scalar_series(rng, 2, 5, max_degree=3, density=0.7)
    h = random_scalar_series(rng, 2, 5, max_degree=2, density=0.7)
    assert_series_close(f.multiply(g), g.multiply(f), rel=1e-12)
    assert_series_close(
        f.multiply(g).multiply(h), f.multiply(g.multiply(h)), rel=1e-12
    )


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------


def test_compose_identity_is_neutral(rng):
    G = random_vector_series(rng, 2, 5, min_degree=1, density=0.6)
    ident = VectorSeries.identity(2, 5)
    assert_series_close(ident.compose(G), G, rel=1e-12)


def test_compose_hand_example():
    # (z + z^2)^2 truncated at 4 = z^2 + 2 z^3 + z^4
    F = VectorSeries.from_coeffs(1, 4, {(2,): (1.0,)})
    G = VectorSeries.from_coeffs(1, 4, {(1,): (1.0,), (2,): (1.0,)})
    expected = VectorSeries.from_coeffs(1, 4, {(2,): (1.0,), (3,): (2.0,), (4,): (1.0,)})
    assert_series_close(F.compose(G), expected, rel=1e-12)


def test_compose_zero_outer():
    Z = VectorSeries.zero(2, 4)
    G = VectorSeries.identity(2, 4)
    assert Z.compose(G).is_zero()


def test_compose_rejects_valuation_zero():
    F = VectorSeries.identity(1, 4)
    G = VectorSeries.from_coeffs(1, 4, {(0,): (1.0,)})
    with pytest.raises(CompositionError):
        F.compose(G)


def test_compose_matches_oracle_and_valuation(rng):
    for n in (1, 2):
        F = random_vector_series(rng, n, 5, min_degree=1, density=0.7)
        G = random_vector_series(rng, n, 5, min_degree=1, density=0.7)
        got = F.compose(G)
        assert_series_close(got, compose_oracle(F, G), rel=1e-11)
        if not got.is_zero():
            assert got.valuation() >= F.valuation()


def test_compose_associative(rng):
    F = random_vector_series(rng, 1, 6, min_degree=1, max_degree=3)
    G = random_vector_series(rng, 1, 6, min_degree=1, max_degree=3)
    H = random_vector_series(rng, 1, 6, min_degree=1, max_degree=2)
    assert_series_close(
        F.compose(G).compose(H), F.compose(G.compose(H)), rel=1e-10
    )


# ---------------------------------------------------------------------------
# formal derivative
# ---------------------------------------------------------------------------


def test_formal_derivative_examples():
    z3 = ScalarSeries.monomial(1, 5, (3,))
    assert formal_derivative(z3, (1,)) == ScalarSeries(1, 5, {(2,): 3.0})
    assert formal_derivative(z3, (2,)) == ScalarSeries(1, 5, {(1,): 3.0})
    m = ScalarSeries.monomial(2, 5, (2, 1))
    assert formal_derivative(m, (1, 1)) == ScalarSeries(2, 5, {(1, 0): 2.0})


def test_formal_derivative_composition_identity(rng):
    # binom(a+b, a) * delta^(a+b) = delta^a delta^b, on the exact range
    f = random_scalar_series(rng, 2, 6, density=0.6)
    a, b = (1, 0), (1, 1)
    lhs = formal_derivative(formal_derivative(f, b), a)
    rhs = formal_derivative(f, (2, 1)).scale(multi_binom((2, 1), a))
    assert_series_close(lhs, rhs, rel=1e-12)


# ---------------------------------------------------------------------------
# shift expansion
# ---------------------------------------------------------------------------


def test_shift_expand_quadratic():
    f = VectorSeries.from_coeffs(1, 4, {(2,): (1.0,)})
    fam = shift_expand(f)
    assert_series_close(fam.coeff((0,)), f, rel=1e-15)
    assert_series_close(
        fam.coeff((1,)), VectorSeries.from_coeffs(1, 4, {(1,): (2.0,)}), rel=1e-15
    )
    assert_series_close(
        fam.coeff((2,)), VectorSeries.from_coeffs(1, 4, {(0,): (1.0,)}), rel=1e-15
    )
    # norms: ||g0|| = ||f|| = 1/4, ||g1|| = 1/2 = 2 ||f||
    assert fam.coeff((0,)).znorm() == 0.25
    assert fam.coeff((1,)).znorm() == 0.5


def test_shift_expand_zero():
    fam = shift_expand(VectorSeries.zero(2, 4))
    assert fam.is_zero()


def test_shift_expand_rejects_low_valuation():
    f = VectorSeries.from_coeffs(1, 4, {(1,): (1.0,)})
    with pytest.raises(ValueError):
        shift_expand(f)


def test_shift_expand_is_composition_with_shift(rng):
    # evaluating the family at v reproduces f(z + v) coefficient-wise:
    # check against direct composition f o (id + v)
    f = random_vector_series(rng, 2, 5, min_degree=2, max_degree=4, density=0.8)
    v = random_vector_series(rng, 2, 5, min_degree=2, max_degree=3, density=0.5)
    fam = shift_expand(f)
    direct = f.compose(VectorSeries.identity(2, 5) + v)
    assert_series_close(fam.evaluate(v), direct, rel=1e-10)


# ---------------------------------------------------------------------------
# weighted norms
# ---------------------------------------------------------------------------


def test_weighted_norm_examples():
    z2 = ScalarSeries.monomial(1, 6, (2,))
    assert weighted_norm(z2, 0.5) == 0.25
    allk = ScalarSeries(1, 6, {(k,): 1.0 for k in range(7)})
    assert weighted_norm(allk, 1.0) == 1.0


def test_family_weighted_norm_shift_bound(rng):
    # ultrametric bound: || shift family of f ||_(1/2) <= ||f||
    for _ in range(20):
        f = random_vector_series(rng, 2, 5, min_degree=2, density=0.5)
        fam = shift_expand(f)
        assert fam.weighted_norm(0.5) <= f.znorm() + 1e-15


def test_family_cauchy_estimate(rng):
    # || delta^alpha F ||_r <= ||F||_r / r^|alpha| with z-adic coefficient norms
    for _ in range(20):
        f = random_vector_series(rng, 2, 5, min_degree=2, density=0.6)
        fam = shift_expand(f)
        for r in (0.3, 0.5, 1.0):
            base = fam.weighted_norm(r)
            for alpha in [(1, 0), (0, 1), (1, 1), (2, 0)]:
                assert fam.delta(alpha).weighted_norm(r) <= base / r ** sum(alpha) + 1e-15


# ---------------------------------------------------------------------------
# ultrametric property suite
# ---------------------------------------------------------------------------


def test_ultrametric_triangle(rng):
    for _ in range(200):
        f = random_vector_series(rng, 1, 6, min_degree=rng.integers(0, 4), density=0.5)
        g = random_vector_series(rng, 1, 6, min_degree=rng.integers(0, 4), density=0.5)
        s = f + g
        assert s.znorm() <= max(f.znorm(), g.znorm()) + 1e-15
        if f.znorm() != g.znorm():
            assert s.znorm() == max(f.znorm(), g.znorm())


def test_valuation_additivity(rng):
    for _ in range(100):
        va, vb = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        f = random_scalar_series(rng, 2, 8, min_degree=va, density=0.6)
        g = random_scalar_series(rng, 2, 8, min_degree=vb, density=0.6)
        if f.is_zero() or g.is_zero():
            continue
        if f.valuation() + g.valuation() <= 8:
            assert f.multiply(g).valuation() == f.valuation() + g.valuation()


def _random_family(rng, n, inner, outer, density=0.5):
    # dyadic coefficients keep every cancellation exact, so z-adic norms of
    # differences are meaningful (no roundoff residue at valuation 0)
    coeffs = {}
    for beta in iter_indices(n, outer):
        if rng.uniform() <= density:
            coeffs[beta] = random_dyadic_vector_series(
                rng, n, inner, max_degree=inner, density=0.4
            )
    return SeriesFamily(n, inner, outer, coeffs)


def test_taylor_inequalities_on_families(rng):
    """First and second order Taylor bounds in the ultrametric weighted norms."""
    n, inner, outer = 1, 4, 3
    checked = 0
    for _ in range(60):
        F = _random_family(rng, n, inner, outer, density=0.7)
        G = _random_family(rng, n, inner, outer, density=0.6)
        H = _random_family(rng, n, inner, outer, density=0.6)
        s = 0.5
        r = max(G.weighted_norm(s), H.weighted_norm(s))
        if r == 0 or F.is_zero():
            continue
        FG = F.compose(G)
        FGH = F.compose(G + H)
        lhs1 = (FGH - FG).weighted_norm(s)
        rhs1 = F.weighted_norm(r) / r * H.weighted_norm(s)
        assert lhs1 <= rhs1 * (1 + 1e-12), (lhs1, rhs1)
        # second order: subtract the differential term sum_i d_i F(G) H_i
        DF_G_H = None
        for i in range(n):
            term_fam = F.delta(unit_index(n, i)).compose(G)
            prod = {}
            for b1, g1 in term_fam.items():
                for b2, g2 in H.items():
                    if sum(b1) + sum(b2) > outer:
                        continue
                    k = tuple(x + y for x, y in zip(b1, b2))
                    contrib = g1.mul_scalar_series(g2.components[i])
                    prod[k] = prod[k] + contrib if k in prod else contrib
            piece = SeriesFamily(n, inner, outer, prod)
            DF_G_H = piece if DF_G_H is None else DF_G_H + piece
        lhs2 = (FGH - FG - DF_G_H).weighted_norm(s)
        rhs2 = F.weighted_norm(r) / r ** 2 * H.weighted_norm(s) ** 2
        assert lhs2 <= rhs2 * (1 + 1e-12), (lhs2, rhs2)
        checked += 1
    assert checked >= 20
