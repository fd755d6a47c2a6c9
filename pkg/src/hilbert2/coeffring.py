"""Arithmetic in the Galois ring W(F_{p^f})/p^M.

Elements are represented by a mantissa polynomial of degree < f over
Z/p^M together with an explicit denominator exponent e >= 0 (the value is
mantissa * p^-e) and an absolute precision claim.  The ring keeps guard
digits above the user-facing precision m so that the 1/p divisions of the
downstream formulas never eat into certified digits.

The coefficient Frobenius is the unique automorphism lifting x -> x^p on
the residue field; it is computed once by Hensel-lifting the p-power of
the stored root of the modulus polynomial and cached as an f x f matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import sympy

from .errors import ConfigError, DenominatorBudgetExceeded, PrecisionExhausted


@dataclass(frozen=True)
class RingParams:
    """Parameters of the coefficient ring W(F_{p^f})/p^m.

    modulus_poly lists the low coefficients (c0, ..., c_{f-1}) of a monic
    degree-f polynomial x^f + c_{f-1} x^{f-1} + ... + c0 that is
    irreducible mod p.  It may be None when f == 1.
    """

    p: int
    f: int = 1
    m: int = 5
    modulus_poly: tuple[int, ...] | None = None
    denom_budget: int = 8

    def __post_init__(self):
        if self.p == 2 or not sympy.isprime(self.p):
            raise ConfigError(f"p must be an odd prime, got {self.p}")
        if self.f < 1:
            raise ConfigError(f"residue degree f must be >= 1, got {self.f}")
        if self.m < 1:
            raise ConfigError(f"precision m must be >= 1, got {self.m}")
        if self.denom_budget < 0:
            raise ConfigError("denominator budget must be >= 0")
        if self.f > 1:
            if self.modulus_poly is None:
                object.__setattr__(self, "modulus_poly", generate_modulus(self.p, self.f))
            elif len(self.modulus_poly) != self.f:
                raise ConfigError(
                    f"modulus_poly must list the {self.f} low coefficients of a monic degree-{self.f} polynomial"
                )


def generate_modulus(p: int, f: int, tries: int = 5000) -> tuple[int, ...]:
    """Find the low coefficients of a monic degree-f irreducible over F_p.

    Deterministic search in lexicographic order so results are reproducible.
    """
    x = sympy.Symbol("x")
    count = 0
    # enumerate tails (c0, ..., c_{f-1}) in base p
    for tail in range(p**f):
        coeffs = [(tail // p**i) % p for i in range(f)]
        if coeffs[0] == 0:
            continue
        poly = sympy.Poly(x**f + sum(c * x**i for i, c in enumerate(coeffs)), x, modulus=p)
        count += 1
        if count > tries:
            break
        if poly.is_irreducible:
            return tuple(coeffs)
    raise ConfigError(f"could not find an irreducible degree-{f} polynomial over F_{p}")


def _poly_xgcd_mod_p(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    """Return (g, u) with u*a = g mod (b, p), g a unit constant, for a coprime to b."""
    # standard extended Euclid over F_p[x]
    r0, r1 = list(a), list(b)
    s0, s1 = [1], [0]

    def deg(v):
        d = len(v) - 1
        while d >= 0 and v[d] % p == 0:
            d -= 1
        return d

    def sub_scaled(u, v, c, shift):
        out = list(u) + [0] * max(0, len(v) + shift - len(u))
        for i, cv in enumerate(v):
            out[i + shift] = (out[i + shift] - c * cv) % p
        return out

    while deg(r1) >= 0:
        d0, d1 = deg(r0), deg(r1)
        if d0 < d1:
            r0, r1, s0, s1 = r1, r0, s1, s0
            continue
        c = (r0[d0] * pow(r1[d1], -1, p)) % p
        r0 = sub_scaled(r0, r1, c, d0 - d1)
        s0 = sub_scaled(s0, s1, c, d0 - d1)
        if deg(r0) < deg(r1):
            r0, r1, s0, s1 = r1, r0, s1, s0
    g = deg(r0)
    if g != 0:
        raise ConfigError("polynomial not invertible mod p (modulus not irreducible?)")
    inv_c = pow(r0[0] % p, -1, p)
    return [r0[0] % p], [(c * inv_c) % p for c in s0]


class CoeffRing:
    """Computational backend for a RingParams instance.

    Mantissas are stored modulo p^Mstore with Mstore = m + denom_budget;
    the budget digits are guard digits consumed by explicit p^-e scalings.
    """

    def __init__(self, params: RingParams):
        self.params = params
        self.p = params.p
        self.f = params.f
        self.m = params.m
        self.budget = params.denom_budget
        self.Mstore = params.m + params.denom_budget
        self.mod = params.p**self.Mstore
        if params.f > 1:
            low = tuple(c % self.mod for c in params.modulus_poly)
            x = sympy.Symbol("x")
            check = sympy.Poly(
                x**self.f + sum((c % self.p) * x**i for i, c in enumerate(low)), x, modulus=self.p
            )
            if not check.is_irreducible:
                raise ConfigError("modulus_poly must be irreducible mod p")
            self.modulus = low
        else:
            self.modulus = ()
        self._frob_matrix: list[tuple[int, ...]] | None = None
        self._trace_matrix: list[tuple[int, ...]] | None = None

    # -- raw polynomial arithmetic mod (modulus, p^Mstore) ------------------

    def poly_mul(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        f, mod = self.f, self.mod
        if f == 1:
            return ((a[0] * b[0]) % mod,)
        prod = [0] * (2 * f - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % mod
        # reduce x^{f+k} via x^f = -(c0 + ... + c_{f-1} x^{f-1})
        for k in range(2 * f - 2, f - 1, -1):
            c = prod[k]
            if c == 0:
                continue
            prod[k] = 0
            for i, mi in enumerate(self.modulus):
                prod[k - f + i] = (prod[k - f + i] - c * mi) % mod
        return tuple(prod[:f])

    def poly_add(self, a, b):
        return tuple((x + y) % self.mod for x, y in zip(a, b))

    def poly_sub(self, a, b):
        return tuple((x - y) % self.mod for x, y in zip(a, b))

    def poly_scale(self, a, c: int):
        return tuple((x * c) % self.mod for x in a)

    def poly_pow(self, a, n: int):
        out = self.one_mant()
        base = a
        while n:
            if n & 1:
                out = self.poly_mul(out, base)
            base = self.poly_mul(base, base)
            n >>= 1
        return out

    def one_mant(self) -> tuple[int, ...]:
        return (1,) + (0,) * (self.f - 1)

    def zero_mant(self) -> tuple[int, ...]:
        return (0,) * self.f

    def int_mant(self, c: int) -> tuple[int, ...]:
        return (c % self.mod,) + (0,) * (self.f - 1)

    def poly_is_unit(self, a) -> bool:
        return any(c % self.p != 0 for c in a)

    def poly_inv(self, a) -> tuple[int, ...]:
        """Inverse of a unit, by mod-p xgcd plus Newton lifting."""
        if not self.poly_is_unit(a):
            raise ZeroDivisionError("not a unit in the coefficient ring")
        if self.f == 1:
            return (pow(a[0], -1, self.mod),)
        a_p = [c % self.p for c in a]
        mod_poly = [c % self.p for c in self.modulus] + [1]
        _, u = _poly_xgcd_mod_p(a_p, mod_poly, self.p)
        inv = tuple(u[i] if i < len(u) else 0 for i in range(self.f))
        # y <- y(2 - a y) doubles the number of correct p-adic digits
        digits = 1
        while digits < self.Mstore:
            ay = self.poly_mul(a, inv)
            two_minus = self.poly_sub(self.poly_add(self.one_mant(), self.one_mant()), ay)
            inv = self.poly_mul(inv, two_minus)
            digits *= 2
        return inv

    def val(self, a) -> int:
        """p-adic valuation of a mantissa (Mstore for the stored zero)."""
        v = self.Mstore
        for c in a:
            if c == 0:
                continue
            cv = 0
            while c % self.p == 0:
                c //= self.p
                cv += 1
            v = min(v, cv)
        return v

    # -- Frobenius and trace -------------------------------------------------

    def frobenius_matrix(self) -> list[tuple[int, ...]]:
        """Row i is the mantissa of sigma(x^i), sigma the coefficient Frobenius."""
        if self._frob_matrix is not None:
            return self._frob_matrix
        if self.f == 1:
            self._frob_matrix = [(1,)]
            return self._frob_matrix
        # Hensel-lift the root: solve h(r) = 0 with r = x^p mod p
        xp = self.poly_pow((0, 1) + (0,) * (self.f - 2), self.p)
        r = xp

        def h_of(t):
            # h(t) = t^f + sum c_i t^i
            out = self.poly_pow(t, self.f)
            ti = self.one_mant()
            for c in self.modulus:
                out = self.poly_add(out, self.poly_scale(ti, c))
                ti = self.poly_mul(ti, t)
            return out

        def hprime_of(t):
            # h'(t) = f t^{f-1} + sum_{i>=1} i c_i t^{i-1}
            out = self.poly_scale(self.poly_pow(t, self.f - 1), self.f)
            for i, c in enumerate(self.modulus):
                if i >= 1 and c:
                    out = self.poly_add(out, self.poly_scale(self.poly_pow(t, i - 1), i * c))
            return out

        for _ in range(self.Mstore.bit_length() + 2):
            hr = h_of(r)
            if all(c == 0 for c in hr):
                break
            corr = self.poly_mul(hr, self.poly_inv(hprime_of(r)))
            r = self.poly_sub(r, corr)
        if not all(c == 0 for c in h_of(r)):
            raise ConfigError("Hensel lift of the Frobenius root failed")
        rows = [self.one_mant()]
        for _ in range(1, self.f):
            rows.append(self.poly_mul(rows[-1], r))
        self._frob_matrix = rows
        return rows

    def frobenius_mant(self, a, k: int = 1) -> tuple[int, ...]:
        k %= self.f
        for _ in range(k):
            rows = self.frobenius_matrix()
            out = self.zero_mant()
            for i, c in enumerate(a):
                if c:
                    out = self.poly_add(out, self.poly_scale(rows[i], c))
            a = out
        return a

    def trace_mant(self, a) -> tuple[int, ...]:
        out = self.zero_mant()
        cur = a
        for _ in range(self.f):
            out = self.poly_add(out, cur)
            cur = self.frobenius_mant(cur)
        return out

    # -- elements -------------------------------------------------------------

    def elem(self, mantissa, e: int = 0, prec: int | None = None) -> "CoeffElem":
        if isinstance(mantissa, int):
            mantissa = self.int_mant(mantissa)
        else:
            mantissa = tuple(c % self.mod for c in mantissa)
        if prec is None:
            prec = self.Mstore - e
        return CoeffElem(self, mantissa, e, prec)._normalize()

    def zero(self) -> "CoeffElem":
        return self.elem(0)

    def one(self) -> "CoeffElem":
        return self.elem(1)


@lru_cache(maxsize=None)
def get_ring(params: RingParams) -> CoeffRing:
    return CoeffRing(params)


@dataclass(frozen=True)
class CoeffElem:
    """mantissa * p^-e, with mantissa certified mod p^(prec + e).

    Values are immutable; arithmetic returns fresh elements.  Normal form:
    when e > 0 the mantissa is not divisible by p unless the element is the
    stored zero.
    """

    ring: CoeffRing = field(repr=False)
    mant: tuple[int, ...]
    e: int
    prec: int

    def _normalize(self) -> "CoeffElem":
        ring, mant, e, prec = self.ring, self.mant, self.e, self.prec
        if e > ring.budget:
            raise DenominatorBudgetExceeded(f"denominator exponent {e} exceeds budget {ring.budget}")
        if prec <= 0:
            raise PrecisionExhausted("no certified digits remain on a coefficient")
        while e > 0 and all(c % ring.p == 0 for c in mant):
            mant = tuple(c // ring.p for c in mant)
            e -= 1
        prec = min(prec, ring.Mstore - e)
        if mant == self.mant and e == self.e and prec == self.prec:
            return self
        return CoeffElem(ring, mant, e, prec)

    # -- predicates ------------------------------------------------------------

    def is_zero(self, mod_p_exp: int | None = None) -> bool:
        q = self.prec if mod_p_exp is None else min(mod_p_exp, self.prec)
        modulus = self.ring.p ** (q + self.e)
        return all(c % modulus == 0 for c in self.mant)

    def is_integral(self) -> bool:
        """True when the p^-e denominator cancels.

        The low e digits of the mantissa are always certified (prec >= 1),
        so this is decidable.
        """
        if self.e == 0:
            return True
        modulus = self.ring.p**self.e
        return all(c % modulus == 0 for c in self.mant)

    def valuation(self) -> int:
        """p-adic valuation of the value (prec when indistinguishable from 0)."""
        return min(self.ring.val(self.mant) - self.e, self.prec)

    # -- arithmetic --------------------------------------------------------------

    def _common(self, other: "CoeffElem"):
        if self.ring is not other.ring and self.ring.params != other.ring.params:
            raise ConfigError("operands live in different coefficient rings")

    def __add__(self, other: "CoeffElem") -> "CoeffElem":
        self._common(other)
        ring = self.ring
        e = max(self.e, other.e)
        a = ring.poly_scale(self.mant, ring.p ** (e - self.e))
        b = ring.poly_scale(other.mant, ring.p ** (e - other.e))
        return CoeffElem(ring, ring.poly_add(a, b), e, min(self.prec, other.prec))._normalize()

    def __sub__(self, other: "CoeffElem") -> "CoeffElem":
        return self + (-other)

    def __neg__(self) -> "CoeffElem":
        ring = self.ring
        return CoeffElem(ring, tuple((-c) % ring.mod for c in self.mant), self.e, self.prec)

    def __mul__(self, other: "CoeffElem") -> "CoeffElem":
        self._common(other)
        ring = self.ring
        e = self.e + other.e
        prec = min(self.prec - other.e, other.prec - self.e)
        return CoeffElem(ring, ring.poly_mul(self.mant, other.mant), e, prec)._normalize()

    def divide_by_p(self, k: int = 1) -> "CoeffElem":
        """Explicit p^-k scaling; costs k digits of absolute precision."""
        return CoeffElem(self.ring, self.mant, self.e + k, self.prec - k)._normalize()

    def unit_inverse(self) -> "CoeffElem":
        ring = self.ring
        if not ring.poly_is_unit(self.mant):
            raise ZeroDivisionError("inverse of a non-unit coefficient")
        inv = ring.poly_inv(self.mant)
        # 1/(u p^-e) = u^-1 p^e : negative denominators are folded into mantissa
        mant = ring.poly_scale(inv, ring.p**self.e)
        return CoeffElem(ring, mant, 0, self.prec)._normalize()

    def frobenius(self, k: int = 1) -> "CoeffElem":
        return CoeffElem(self.ring, self.ring.frobenius_mant(self.mant, k), self.e, self.prec)

    def trace(self) -> "CoeffElem":
        return CoeffElem(self.ring, self.ring.trace_mant(self.mant), self.e, self.prec)

    # -- views ----------------------------------------------------------------

    def lift(self) -> int:
        """Integer representative, only defined for prime-subring elements with e = 0."""
        if self.e != 0:
            raise NonIntegralLift(self)
        if any(c != 0 for c in self.mant[1:]):
            raise ValueError("element is not in the prime subring")
        return self.mant[0]

    def residue_mod(self, j: int) -> int:
        """Value mod p^j as an integer in [0, p^j); requires integrality, a
        prime-subring value and at least j certified digits."""
        p = self.ring.p
        if j > self.prec:
            raise PrecisionExhausted(f"only {self.prec} digits certified, mod p^{j} requested")
        if not self.is_integral():
            raise ValueError("residue of a non-integral element")
        mant0 = self.mant[0] // p**self.e
        if any(c % p ** (j + self.e) != 0 for c in self.mant[1:]):
            raise ValueError("element is not in the prime subring")
        return mant0 % p**j

    def __repr__(self):
        body = str(self.mant[0]) if self.ring.f == 1 else str(list(self.mant))
        if self.e:
            body += f"/p^{self.e}"
        return f"<{body} mod p^{self.prec}>"


class NonIntegralLift(ValueError):
    def __init__(self, elem):
        super().__init__(f"cannot lift {elem!r}: denominator present")


def ring_arith(a: CoeffElem, b: CoeffElem, op: str) -> CoeffElem:
    """Named entry point over the dunder arithmetic: op in {add, sub, mul}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def coeff_frobenius(a: CoeffElem) -> CoeffElem:
    return a.frobenius()


def coeff_trace(a: CoeffElem) -> CoeffElem:
    return a.trace()
