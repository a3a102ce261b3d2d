"""Truncated multivariate formal power series over complex coefficients.

Conventions used throughout the package:

* An exponent index is a tuple of ``n`` non-negative integers; a momentum is
  a tuple of ``n`` signed integers.  ``degree`` sums entries (the signed
  degree for momenta), ``abs_degree`` sums absolute values.
* Every series carries a truncation degree ``trunc`` fixed at construction.
  Indices of total degree above ``trunc`` are dropped silently; all
  operations are exact on the retained range, i.e. the stored data is
  treated as a polynomial.  Mixing different ``n`` or ``trunc`` raises
  :class:`~treelin.errors.TruncationMismatch`.
* The z-adic valuation of a series is the least total degree of a stored
  nonzero coefficient (``math.inf`` for the zero series); the matching
  ultrametric norm is ``2**-valuation``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CompositionError, TruncationMismatch

_DENSE_CUTOFF = 4000  # switch to dense accumulation above this many term pairs


# ---------------------------------------------------------------------------
# index helpers
# ---------------------------------------------------------------------------

def degree(alpha) -> int:
    """Total (signed) degree: sum of the entries."""
    return sum(alpha)


def abs_degree(nu) -> int:
    """Sum of absolute values of the entries."""
    return sum(abs(x) for x in nu)


signed_degree = degree  # explicit name for momenta


def dominates(alpha, beta) -> bool:
    """Component-wise ``alpha >= beta``."""
    return all(a >= b for a, b in zip(alpha, beta))


def index_add(alpha, beta):
    return tuple(a + b for a, b in zip(alpha, beta))


def index_sub(alpha, beta):
    return tuple(a - b for a, b in zip(alpha, beta))


def unit_index(n: int, i: int):
    """Standard basis index e_i (0-based axis)."""
    return tuple(1 if k == i else 0 for k in range(n))


def graded_key(alpha):
    """Sort key for graded lexicographic order."""
    return (sum(alpha), alpha)


def multi_factorial(alpha) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def multi_binom(alpha, beta) -> int:
    """Product of per-component binomials; 0 unless alpha >= beta."""
    if not dominates(alpha, beta):
        return 0
    out = 1
    for a, b in zip(alpha, beta):
        out *= math.comb(a, b)
    return out


def iter_indices(n: int, max_degree: int, min_degree: int = 0):
    """All indices in N^n with min_degree <= total degree <= max_degree, graded-lex."""
    for d in range(min_degree, max_degree + 1):
        yield from _indices_of_degree(n, d)


def _indices_of_degree(n: int, d: int):
    if n == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _indices_of_degree(n - 1, d - first):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# scalar series
# ---------------------------------------------------------------------------

class ScalarSeries:
    """A single truncated power series in ``n`` variables.

    Coefficients are stored sparsely as ``{index: complex}``; exact zeros and
    indices above the truncation degree are dropped at construction.
    """

    __slots__ = ("n", "trunc", "_c")

    def __init__(self, n: int, trunc: int, coeffs=None):
        if n < 1:
            raise ValueError("need at least one variable")
        if trunc < 0:
            raise ValueError("truncation degree must be non-negative")
        self.n = n
        self.trunc = trunc
        clean = {}
        if coeffs:
            for alpha, c in coeffs.items():
                alpha = tuple(int(a) for a in alpha)
                if len(alpha) != n or any(a < 0 for a in alpha):
                    raise ValueError(f"bad index {alpha} for n={n}")
                c = complex(c)
                if c != 0 and sum(alpha) <= trunc:
                    clean[alpha] = clean.get(alpha, 0j) + c
            clean = {a: c for a, c in clean.items() if c != 0}
        self._c = clean

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n, trunc):
        return cls(n, trunc)

    @classmethod
    def monomial(cls, n, trunc, alpha, coef=1.0):
        return cls(n, trunc, {tuple(alpha): coef})

    @classmethod
    def one(cls, n, trunc):
        return cls.monomial(n, trunc, (0,) * n, 1.0)

    # -- basic queries -------------------------------------------------------
    def get(self, alpha) -> complex:
        return self._c.get(tuple(alpha), 0j)

    def items(self):
        """Coefficients in graded lexicographic order."""
        return [(a, self._c[a]) for a in sorted(self._c, key=graded_key)]

    @property
    def support(self):
        return frozenset(self._c)

    def __len__(self):
        return len(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def valuation(self):
        if not self._c:
            return math.inf
        return min(sum(a) for a in self._c)

    def znorm(self) -> float:
        v = self.valuation()
        return 0.0 if v is math.inf else 2.0 ** (-v)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._c.values()), default=0.0)

    # -- arithmetic -----------------------------------------------------------
    def _check(self, other):
        if self.n != other.n or self.trunc != other.trunc:
            raise TruncationMismatch(
                f"incompatible series: n={self.n},D={self.trunc} vs "
                f"n={other.n},D={other.trunc}"
            )

    def __add__(self, other):
        self._check(other)
        out = dict(self._c)
        for a, c in other._c.items():
            s = out.get(a, 0j) + c
            if s == 0:
                out.pop(a, None)
            else:
                out[a] = s
        return self._wrap(out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self._wrap({a: -c for a, c in self._c.items()})

    def scale(self, c):
        c = complex(c)
        if c == 0:
            return ScalarSeries.zero(self.n, self.trunc)
        return self._wrap({a: v * c for a, v in self._c.items()})

    def __mul__(self, other):
        if isinstance(other, ScalarSeries):
            return self.multiply(other)
        return self.scale(other)

    __rmul__ = __mul__

    def multiply(self, other: "ScalarSeries") -> "ScalarSeries":
        """Cauchy product truncated at the shared degree."""
        self._check(other)
        if not self._c or not other._c:
            return ScalarSeries.zero(self.n, self.trunc)
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        if self.n <= 2 and len(small) * len(big) > _DENSE_CUTOFF:
            return self._mul_dense(small, big)
        D = self.trunc
        out = {}
        big_items = big.items()
        for a, ca in small.items():
            da = sum(a)
            for b, cb in big_items:
                if da + sum(b) > D:
                    continue
                k = index_add(a, b)
                out[k] = out.get(k, 0j) + ca * cb
        return self._wrap({k: v for k, v in out.items() if v != 0})

    @staticmethod
    def _mul_dense(small: "ScalarSeries", big: "ScalarSeries") -> "ScalarSeries":
        # exact shifted accumulation; deterministic (sorted iteration order)
        D = small.trunc
        n = small.n
        shape = (D + 1,) * n
        dense = np.zeros(shape, dtype=complex)
        for a, c in big.items():
            dense[a] = c
        acc = np.zeros(shape, dtype=complex)
        if n == 1:
            for (a0,), c in small.items():
                acc[a0:] += c * dense[: D + 1 - a0]
        else:
            for (a0, a1), c in small.items():
                acc[a0:, a1:] += c * dense[: D + 1 - a0, : D + 1 - a1]
        out = {}
        for idx in np.argwhere(acc != 0):
            a = tuple(int(x) for x in idx)
            if sum(a) <= D:
                out[a] = complex(acc[a])
        return ScalarSeries(small.n, D, out)

    def pow_int(self, k: int) -> "ScalarSeries":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = ScalarSeries.one(self.n, self.trunc)
        base = self
        while k:
            if k & 1:
                out = out.multiply(base)
            base = base.multiply(base) if k > 1 else base
            k >>= 1
        return out

    def truncate(self, new_trunc: int) -> "ScalarSeries":
        if new_trunc == self.trunc:
            return self
        return ScalarSeries(self.n, new_trunc, self._c)

    def _wrap(self, coeffs) -> "ScalarSeries":
        s = ScalarSeries.__new__(ScalarSeries)
        s.n = self.n
        s.trunc = self.trunc
        s._c = coeffs
        return s

    # -- comparison ------------------------------------------------------------
    def __eq__(self, other):
        return (
            isinstance(other, ScalarSeries)
            and self.n == other.n
            and self.trunc == other.trunc
            and self._c == other._c
        )

    def __hash__(self):
        return hash((self.n, self.trunc, frozenset(self._c.items())))

    def approx_equal(self, other, rel=1e-9, abs_tol=1e-12) -> bool:
        self._check(other)
        keys = set(self._c) | set(other._c)
        scale = max(self.max_abs(), other.max_abs(), 1.0)
        return all(
            abs(self.get(k) - other.get(k)) <= max(abs_tol, rel * scale)
            for k in keys
        )

    def __repr__(self):
        terms = ", ".join(f"{a}:{c:.4g}" for a, c in self.items()[:6])
        more = "..." if len(self) > 6 else ""
        return f"ScalarSeries(n={self.n}, D={self.trunc}, {{{terms}{more}}})"


# ---------------------------------------------------------------------------
# vector series
# ---------------------------------------------------------------------------

class VectorSeries:
    """An n-component truncated series in n variables; the space germs live in."""

    __slots__ = ("components",)

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("need at least one component")
        n, D = components[0].n, components[0].trunc
        if len(components) != n:
            raise ValueError(f"expected {n} components, got {len(components)}")
        for c in components:
            if c.n != n or c.trunc != D:
                raise TruncationMismatch("components disagree on n or truncation")
        self.components = components

    # -- constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, n, trunc):
        return cls([ScalarSeries.zero(n, trunc)] * n)

    @classmethod
    def identity(cls, n, trunc):
        return cls([
            ScalarSeries.monomial(n, trunc, unit_index(n, i)) for i in range(n)
        ])

    @classmethod
    def monomial(cls, n, trunc, alpha, vec):
        return cls([
            ScalarSeries.monomial(n, trunc, alpha, v) if v != 0
            else ScalarSeries.zero(n, trunc)
            for v in vec
        ])

    @classmethod
    def from_coeffs(cls, n, trunc, coeffs):
        """Build from ``{index: (c_1..c_n)}``."""
        per = [dict() for _ in range(n)]
        for alpha, vec in coeffs.items():
            for j, v in enumerate(vec):
                if v != 0:
                    per[j][tuple(alpha)] = v
        return cls([ScalarSeries(n, trunc, p) for p in per])

    # -- queries ---------------------------------------------------------------
    @property
    def n(self):
        return self.components[0].n

    @property
    def trunc(self):
        return self.components[0].trunc

    def component(self, j) -> ScalarSeries:
        return self.components[j]

    def coefficient(self, alpha):
        return tuple(c.get(alpha) for c in self.components)

    def support(self):
        s = set()
        for c in self.components:
            s |= c.support
        return frozenset(s)

    def coeff_items(self):
        """(index, coefficient vector) pairs in graded lexicographic order."""
        return [(a, self.coefficient(a)) for a in sorted(self.support(), key=graded_key)]

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def valuation(self):
        return min(c.valuation() for c in self.components)

    def znorm(self) -> float:
        v = self.valuation()
        return 0.0 if v is math.inf else 2.0 ** (-v)

    def max_abs(self) -> float:
        return max(c.max_abs() for c in self.components)

    def per_degree_max(self):
        """degree -> max coefficient modulus over all components, sorted by degree."""
        out = {}
        for comp in self.components:
            for a, c in comp.items():
                d = sum(a)
                out[d] = max(out.get(d, 0.0), abs(c))
        return dict(sorted(out.items()))

    # -- arithmetic --------------------------------------------------------------
    def __add__(self, other):
        return VectorSeries([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return VectorSeries([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorSeries([-c for c in self.components])

    def scale(self, c):
        return VectorSeries([comp.scale(c) for comp in self.components])

    def mul_scalar_series(self, s: ScalarSeries) -> "VectorSeries":
        return VectorSeries([comp.multiply(s) for comp in self.components])

    def truncate(self, new_trunc):
        return VectorSeries([c.truncate(new_trunc) for c in self.components])

    def approx_equal(self, other, rel=1e-9, abs_tol=1e-12) -> bool:
        return all(
            a.approx_equal(b, rel, abs_tol)
            for a, b in zip(self.components, other.components)
        )

    def __eq__(self, other):
        return isinstance(other, VectorSeries) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"VectorSeries(n={self.n}, D={self.trunc}, v={self.valuation()})"

    # -- composition ---------------------------------------------------------------
    def compose(self, inner: "VectorSeries") -> "VectorSeries":
        """F(G): substitute the components of ``inner`` for the variables.

        Requires every component of ``inner`` to have valuation >= 1, which
        makes the truncated composition independent of dropped tails.
        """
        if self.n != inner.n or self.trunc != inner.trunc:
            raise TruncationMismatch("composition needs matching n and truncation")
        for j, comp in enumerate(inner.components):
            if not comp.is_zero() and comp.valuation() < 1:
                raise CompositionError(
                    f"inner component {j} has valuation 0; composition undefined"
                )
        n, D = self.n, self.trunc
        cache = {(0,) * n: ScalarSeries.one(n, D)}

        def power(alpha) -> ScalarSeries:
            p = cache.get(alpha)
            if p is not None:
                return p
            i = next(k for k, a in enumerate(alpha) if a > 0)
            prev = power(index_sub(alpha, unit_index(n, i)))
            p = prev.multiply(inner.components[i])
            cache[alpha] = p
            return p

        out = [ScalarSeries.zero(n, D) for _ in range(n)]
        for alpha in sorted(self.support(), key=graded_key):
            # valuation(inner) >= 1 makes deg(power) >= |alpha|: skip hopeless ones
            if inner.valuation() * sum(alpha) > D and sum(alpha) > 0:
                continue
            p = power(alpha)
            if p.is_zero():
                continue
            for j in range(n):
                c = self.components[j].get(alpha)
                if c != 0:
                    out[j] = out[j] + p.scale(c)
        return VectorSeries(out)


# ---------------------------------------------------------------------------
# formal derivatives and the shift family
# ---------------------------------------------------------------------------

def formal_derivative(f: ScalarSeries, beta) -> ScalarSeries:
    """Binomial-weighted derivative: sum over alpha >= beta of binom(alpha,beta) f_alpha z^(alpha-beta)."""
    beta = tuple(beta)
    out = {}
    for alpha, c in f._c.items():
        if dominates(alpha, beta):
            out[index_sub(alpha, beta)] = c * multi_binom(alpha, beta)
    return ScalarSeries(f.n, f.trunc, out)


def vector_formal_derivative(f: VectorSeries, beta) -> VectorSeries:
    return VectorSeries([formal_derivative(c, beta) for c in f.components])


def weighted_norm(f, r: float) -> float:
    """sup over stored indices of (max component modulus) * r^degree.

    This is the Archimedean growth proxy used by the diagnostics; on a
    truncation it is a lower bound for the corresponding supremum over all
    indices.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    comps = f.components if isinstance(f, VectorSeries) else (f,)
    best = 0.0
    for comp in comps:
        for a, c in comp._c.items():
            best = max(best, abs(c) * r ** sum(a))
    return best


class SeriesFamily:
    """A power series in n auxiliary variables whose coefficients are vector series.

    This is the shape taken by the expansion G(v) = sum_beta g_beta v^beta of
    a shifted map, and the natural domain for the ultrametric weighted norm
    ``sup_beta ||g_beta|| r^|beta|`` (coefficient norms are z-adic).
    """

    __slots__ = ("n", "inner_trunc", "outer_trunc", "coeffs")

    def __init__(self, n, inner_trunc, outer_trunc, coeffs):
        self.n = n
        self.inner_trunc = inner_trunc
        self.outer_trunc = outer_trunc
        clean = {}
        for beta, g in coeffs.items():
            beta = tuple(beta)
            if sum(beta) > outer_trunc or g.is_zero():
                continue
            if g.n != n or g.trunc != inner_trunc:
                raise TruncationMismatch("family coefficient disagrees on n or truncation")
            clean[beta] = g
        self.coeffs = clean

    def coeff(self, beta) -> VectorSeries:
        return self.coeffs.get(tuple(beta), VectorSeries.zero(self.n, self.inner_trunc))

    def items(self):
        return [(b, self.coeffs[b]) for b in sorted(self.coeffs, key=graded_key)]

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        keys = set(self.coeffs) | set(other.coeffs)
        return SeriesFamily(
            self.n, self.inner_trunc, self.outer_trunc,
            {b: self.coeff(b) + other.coeff(b) for b in keys},
        )

    def __sub__(self, other):
        keys = set(self.coeffs) | set(other.coeffs)
        return SeriesFamily(
            self.n, self.inner_trunc, self.outer_trunc,
            {b: self.coeff(b) - other.coeff(b) for b in keys},
        )

    def scale(self, c):
        return SeriesFamily(
            self.n, self.inner_trunc, self.outer_trunc,
            {b: g.scale(c) for b, g in self.coeffs.items()},
        )

    def weighted_norm(self, r: float) -> float:
        """Ultrametric weighted norm: sup_beta 2^(-v(g_beta)) r^|beta|."""
        if r <= 0:
            raise ValueError("radius must be positive")
        return max((g.znorm() * r ** sum(b) for b, g in self.coeffs.items()), default=0.0)

    def delta(self, alpha) -> "SeriesFamily":
        """Formal derivative in the auxiliary variables."""
        alpha = tuple(alpha)
        out = {}
        for beta, g in self.coeffs.items():
            if dominates(beta, alpha):
                out[index_sub(beta, alpha)] = g.scale(multi_binom(beta, alpha))
        return SeriesFamily(self.n, self.inner_trunc, self.outer_trunc, out)

    def evaluate(self, x: VectorSeries) -> VectorSeries:
        """sum_beta g_beta * x^beta for an argument with valuation >= 1."""
        if x.n != self.n or x.trunc != self.inner_trunc:
            raise TruncationMismatch("argument disagrees with family on n or truncation")
        if not x.is_zero() and x.valuation() < 1:
            raise CompositionError("family evaluation needs an argument of valuation >= 1")
        n, D = self.n, self.inner_trunc
        cache = {(0,) * n: ScalarSeries.one(n, D)}

        def power(beta) -> ScalarSeries:
            p = cache.get(beta)
            if p is not None:
                return p
            i = next(k for k, b in enumerate(beta) if b > 0)
            p = power(index_sub(beta, unit_index(n, i))).multiply(x.components[i])
            cache[beta] = p
            return p

        acc = VectorSeries.zero(n, D)
        for beta, g in self.items():
            p = power(beta)
            if not p.is_zero():
                acc = acc + g.mul_scalar_series(p)
        return acc

    def compose(self, inner: "SeriesFamily") -> "SeriesFamily":
        """Substitute the auxiliary variables by the components of another family."""
        if inner.n != self.n or inner.inner_trunc != self.inner_trunc:
            raise TruncationMismatch("family composition needs matching n and inner truncation")
        n, Dz, Dx = self.n, self.inner_trunc, self.outer_trunc

        def fam_mul(a, b):
            out = {}
            for ka, va in a.items():
                da = sum(ka)
                for kb, vb in b.items():
                    if da + sum(kb) > Dx:
                        continue
                    k = index_add(ka, kb)
                    prod = va.multiply(vb)
                    if prod.is_zero():
                        continue
                    out[k] = out[k] + prod if k in out else prod
            return out

        comp = []
        for i in range(n):
            comp.append({
                b: vs.components[i]
                for b, vs in inner.coeffs.items()
                if not vs.components[i].is_zero()
            })
        one = {(0,) * n: ScalarSeries.one(n, Dz)}
        pow_cache = {(0,) * n: one}

        def fam_power(beta):
            p = pow_cache.get(beta)
            if p is not None:
                return p
            i = next(k for k, b in enumerate(beta) if b > 0)
            p = fam_mul(fam_power(index_sub(beta, unit_index(n, i))), comp[i])
            pow_cache[beta] = p
            return p

        acc = {}
        for beta, g in self.items():
            for k, s in fam_power(beta).items():
                contrib = g.mul_scalar_series(s)
                if contrib.is_zero():
                    continue
                acc[k] = acc[k] + contrib if k in acc else contrib
        return SeriesFamily(n, Dz, Dx, acc)


def shift_expand(f: VectorSeries) -> SeriesFamily:
    """Expansion family of v -> f(z + v): g_beta = sum_alpha binom(alpha+beta, beta) f_(alpha+beta) z^alpha.

    Requires valuation(f) >= 2 so the family inherits the norms
    ||g_0|| = ||f||, ||g_beta|| <= 2||f|| for |beta| = 1 (with equality for
    some axis) and the weighted bound ||G||_(1/2) <= ||f||.
    """
    if not f.is_zero() and f.valuation() < 2:
        raise ValueError("shift expansion needs valuation >= 2")
    out = {}
    for beta in iter_indices(f.n, f.trunc):
        g = vector_formal_derivative(f, beta)
        if not g.is_zero():
            out[beta] = g
    return SeriesFamily(f.n, f.trunc, f.trunc, out)
