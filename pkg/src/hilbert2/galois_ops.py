"""The operator calculus on series: phi, psi, gamma-powers, the ratio
operator (gamma2^c - 1)/(gamma2 - 1), and the (phi - 1)-solver.

The same operator algebra serves every level: at the base the parameters
are (chi(gamma1), N); at level n they are (chi(gamma1_n), eta(gamma2_n)),
because gamma1_n sends 1+pi to its chi(gamma1_n)-th power and gamma2_n
multiplies T by (1+pi)^eta(gamma2_n) in the level-n variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy

from .errors import ConfigError, DecompositionFailed, NotInDomain
from .laurent import (
    INF,
    Series,
    SeriesRing,
    _fold_discard,
    binomial_pow,
    series_invert,
    substitute,
)


def default_chi_gamma1(p: int) -> int:
    """Smallest primitive root mod p^2 (topological generator of Z_p^x)."""
    return int(sympy.primitive_root(p * p))


@dataclass(frozen=True)
class GaloisParams:
    """Group data: base generators (chi_gamma1 = a, eta_n = N) and the
    level-n generators (chi_gamma1n, eta_gamma2n)."""

    p: int
    level: int = 1
    chi_gamma1: int | None = None
    eta_n: int = 1
    chi_gamma1n: int | None = None
    eta_gamma2n: int | None = None

    def __post_init__(self):
        if self.level < 1:
            raise ConfigError("level n must be >= 1")
        if self.chi_gamma1 is None:
            object.__setattr__(self, "chi_gamma1", default_chi_gamma1(self.p))
        if self.eta_n % self.p == 0:
            raise ConfigError("N = eta(gamma2) must be a p-unit")
        if self.chi_gamma1 % self.p == 0:
            raise ConfigError("chi(gamma1) must be a p-unit")
        pn = self.p**self.level
        if self.chi_gamma1n is None:
            object.__setattr__(self, "chi_gamma1n", 1 + pn)
        if self.eta_gamma2n is None:
            object.__setattr__(self, "eta_gamma2n", pn)
        if (self.chi_gamma1n - 1) % pn:
            raise ConfigError("chi(gamma1_n) must be 1 mod p^n")
        v = 0
        eta = self.eta_gamma2n
        while eta % self.p == 0:
            eta //= self.p
            v += 1
        if v != self.level:
            raise ConfigError("eta(gamma2_n) must have p-valuation exactly n")


class Operators:
    """Operator engine bound to a series ring and a (chi, N) pair.

    Base-level engine: chi = chi(gamma1), N = eta(gamma2) = N.
    Level-n engine:    chi = chi(gamma1_n), N = eta(gamma2_n).
    """

    def __init__(self, ring: SeriesRing, chi: int, N: int):
        self.ring = ring
        self.chi = chi
        self.N = N
        self.p = ring.p
        one = ring.one()
        self._one = one
        self._one_plus_pi = one + ring.gen_pi()
        self._binom_cache: dict[int, Series] = {}
        self._ratio_cache: dict[tuple[int, int], Series] = {}
        self._phi_pi = self.one_plus_pi_pow(self.p) - one
        self._psi_solver: _PsiSolver | None = None

    # -- cached (1+pi)^c ------------------------------------------------------

    def one_plus_pi_pow(self, c) -> Series:
        rep = self.ring.exp_rep(c)
        out = self._binom_cache.get(rep)
        if out is None:
            out = binomial_pow(rep, self._one_plus_pi)
            self._binom_cache[rep] = out
        return out

    @property
    def phi_pi(self) -> Series:
        return self._phi_pi

    # -- coefficient Frobenius on a whole series --------------------------------

    def _coeff_frob(self, a: Series, k: int = 1) -> Series:
        if self.ring.f == 1 or k % self.ring.f == 0:
            return a
        cr = self.ring.cr
        arr = np.empty_like(a.arr)
        for it in range(a.arr.shape[0]):
            for iy in range(a.arr.shape[1]):
                arr[it, iy, :] = cr.frobenius_mant(
                    tuple(int(c) for c in a.arr[it, iy]), k)
        return Series._assemble(self.ring, arr, a.window.t_lo, a.window.y_lo,
                                a.e, a.q, a.above_q, a.below_q)

    # -- the operators ------------------------------------------------------------

    def phi(self, a: Series) -> Series:
        """Coefficient Frobenius, then pi -> (1+pi)^p - 1 and T -> T^p."""
        return substitute(self._coeff_frob(a), pi_image=self._phi_pi, t_image=(self.p, 1))

    def gamma1_pow(self, c: int, a: Series) -> Series:
        """gamma1^c: pi -> (1+pi)^(chi^c) - 1, T fixed."""
        if c == 0:
            return a
        exp = pow(self.chi, c, self.ring.exp_mod)
        image = self.one_plus_pi_pow(exp) - self._one
        return substitute(a, pi_image=image, t_image=None)

    def _t_columns(self, a: Series):
        w = a.window
        for it in range(a.arr.shape[0]):
            col = a.arr[it:it + 1]
            if not col.any():
                continue
            k = w.t_lo + it
            piece = Series._assemble(self.ring, np.array(col), k, w.y_lo,
                                     a.e, a.q, INF, a.below_q)
            yield k, piece

    def _fold_arg_claims(self, out: Series, a: Series) -> Series:
        return out.replace_claims(q=np.minimum(out.q, a.q),
                                  above_q=min(out.above_q, a.above_q),
                                  below_q=min(out.below_q, a.below_q))

    def gamma2_pow(self, c, a: Series) -> Series:
        """gamma2^c: termwise T^k-column multiplier (1+pi)^(c*N*k)."""
        ring = self.ring
        rep_c = ring.exp_rep(c)
        out = ring.zero()
        for k, piece in self._t_columns(a):
            if k == 0:
                out = out + piece
            else:
                out = out + piece * self.one_plus_pi_pow(rep_c * self.N * k)
        return self._fold_arg_claims(out, a)

    def gamma2_ratio(self, c, a: Series) -> Series:
        """(gamma2^c - 1)/(gamma2 - 1): on T^k-columns the multiplier
        ((1+pi)^(cNk) - 1)/((1+pi)^(Nk) - 1); times c on k = 0."""
        ring = self.ring
        rep_c = ring.exp_rep(c)
        c_scalar = rep_c % ring.mod
        out = ring.zero()
        for k, piece in self._t_columns(a):
            if k == 0:
                out = out + piece.scale(c_scalar)
            else:
                mult = self._ratio_cache.get((rep_c, k))
                if mult is None:
                    num = self.one_plus_pi_pow(rep_c * self.N * k) - self._one
                    den = self.one_plus_pi_pow(self.N * k) - self._one
                    mult = num * series_invert(den)
                    self._ratio_cache[(rep_c, k)] = mult
                out = out + piece * mult
        return self._fold_arg_claims(out, a)

    def psi(self, a: Series) -> Series:
        """Left inverse of phi via the rank-p^2 basis decomposition
        a = sum phi(x_{r,s}) T^r (1+pi)^s, returning x_{0,0}."""
        ring = self.ring
        cap = ring.cap
        p = self.p
        if self._psi_solver is None:
            self._psi_solver = _PsiSolver(self)
        solver = self._psi_solver
        target = max(1, a.min_claim()) + a.e
        terms_out: dict[tuple[int, int], list] = {}
        for t_idx in range(a.arr.shape[0]):
            t = a.window.t_lo + t_idx
            if t % p:
                continue
            if not a.arr[t_idx:t_idx + 1].any():
                continue
            comps = solver.solve_column(a, t_idx, target)
            for k, mant in comps[0].items():
                if any(mant):
                    terms_out[(t // p, k)] = mant
        out = ring.from_terms({key: tuple(v) for key, v in terms_out.items()}, e=a.e)
        out = self._coeff_frob(out, self.ring.f - 1)
        # output claims: block k is certified by the rows p*k .. p*k+p-1 it
        # pivots on, degraded by the fog that unknown above-cap content
        # spreads downward one valuation per block
        k_top = (cap.y_hi + 1) // p
        q = np.full(cap.yspan, INF, dtype=np.int64)
        for k in range(cap.y_lo, cap.y_hi + 1):
            bound = INF
            for j in range(p * k, p * k + p):
                if j <= cap.y_hi:
                    bound = min(bound, a.eff_q(j))
            if a.above_q < INF:
                bound = min(bound, a.above_q + max(0, k_top - k))
            q[k - cap.y_lo] = max(0, bound)
        if a.below_q < INF:
            q = np.minimum(q, a.below_q)
        return out.replace_claims(q=q, above_q=a.above_q, below_q=a.below_q)

    def solve_phi_minus_one(self, v: Series) -> Series:
        """u with (phi - 1)u = v for v in pi * S: u = -sum_k phi^k(v)."""
        ymin = v.support_y_min()
        if ymin is not None and ymin < 1:
            low, _ = v.split_y(1)
            if not low.is_zero():
                raise NotInDomain(
                    "(phi-1)-solver needs input inside pi*S (pi-exponent >= 1)")
        acc = v
        term = v
        limit = self.ring.Mstore + self.ring.cap.yspan + 8
        for _ in range(limit):
            term = self.phi(term)
            if term.is_zero():
                acc = _fold_discard(acc, term)
                break
            acc = acc + term
        else:
            raise NotInDomain("phi-orbit did not converge; input not in pi*S?")
        return -acc


class _PsiSolver:
    """Square linear system for one T-class of the psi decomposition.

    Rows are pi-exponents d over the full cap; the unknown with pivot d is
    the pi^k-coefficient of the s-family, (k, s) = (d div p, d mod p).
    The matrix entry M[d, pivot'] is the pi^d coefficient of
    phi(pi^k')(1+pi)^s'.  The block diagonal consists of unit
    upper-triangular binomial blocks; everything off the blocks is
    divisible by p, so block back-substitution plus p-adic iteration
    converges.
    """

    def __init__(self, ops: Operators):
        self.ops = ops
        self.ring = ops.ring
        self.p = ops.p
        cap = self.ring.cap
        self.y_lo, self.y_hi = cap.y_lo, cap.y_hi
        self.rows = cap.yspan
        ring = self.ring
        p = self.p
        pivots = list(range(self.y_lo, self.y_hi + 1))
        self.pivots = pivots
        one = ring.one()
        pow_1p: dict[int, Series] = {0: one}
        for s in range(1, p):
            pow_1p[s] = pow_1p[s - 1] * ops._one_plus_pi
        k_min = min(d // p for d in pivots)
        k_max = max(d // p for d in pivots)
        phi_pow: dict[int, Series] = {0: one}
        for k in range(1, k_max + 1):
            phi_pow[k] = phi_pow[k - 1] * ops.phi_pi
        if k_min < 0:
            inv = series_invert(ops.phi_pi)
            for k in range(-1, k_min - 1, -1):
                phi_pow[k] = phi_pow[k + 1] * inv
        mat = np.zeros((self.rows, self.rows),
                       dtype=np.int64 if ring.use_i64 else object)
        for col, d in enumerate(pivots):
            k, s = d // p, d % p
            col_series = phi_pow[k] * pow_1p[s]
            cw = col_series.window
            for iy in range(col_series.arr.shape[1]):
                y = cw.y_lo + iy
                if self.y_lo <= y <= self.y_hi:
                    mat[y - self.y_lo, col] = int(col_series.arr[0, iy])
        self.mat = mat

    def solve_column(self, a: Series, t_idx: int, target: int) -> dict[int, dict[int, list[int]]]:
        """Solve one T-column to p^target; returns {s: {k: mantissa-list}}."""
        ring = self.ring
        p = self.p
        mod = ring.mod
        f = ring.f
        rows = self.rows
        w = a.window
        check_mod = p ** min(ring.Mstore, target)
        comps: dict[int, dict[int, list[int]]] = {s: {} for s in range(p)}
        for comp in range(f):
            x = np.zeros(rows, dtype=self.mat.dtype)
            for iy in range(a.arr.shape[1]):
                y = w.y_lo + iy
                if self.y_lo <= y <= self.y_hi:
                    cell = a.arr[t_idx, iy] if f == 1 else a.arr[t_idx, iy, comp]
                    x[y - self.y_lo] = int(cell)
            u = np.zeros(rows, dtype=self.mat.dtype)
            r = x.copy()
            for _ in range(ring.Mstore + 2):
                if not (r % check_mod).any():
                    break
                delta = self._block_subst(r)
                u = (u + delta) % mod
                r = (x - self.mat @ u) % mod
            else:
                raise DecompositionFailed(
                    "psi decomposition did not converge within the window")
            for col, d in enumerate(self.pivots):
                k, s = d // p, d % p
                val = int(u[col])
                if val:
                    comps[s].setdefault(k, [0] * f)[comp] = val
        return comps

    def _block_subst(self, r: np.ndarray) -> np.ndarray:
        """Invert the unit binomial block diagonal against r."""
        p = self.p
        mod = self.ring.mod
        out = np.zeros_like(r)
        by_block: dict[int, list[int]] = {}
        for col, d in enumerate(self.pivots):
            by_block.setdefault(d // p, []).append(col)
        for k, cols in by_block.items():
            cols = sorted(cols, key=lambda c: self.pivots[c] % p)
            svals = [self.pivots[c] % p for c in cols]
            # solve C(s', j) u_{s'} = r_{pk+j} top-down (unit diagonal)
            for idx in range(len(cols) - 1, -1, -1):
                s = svals[idx]
                acc = int(r[self.pivots[cols[idx]] - self.y_lo])
                for jdx in range(idx + 1, len(cols)):
                    acc -= math.comb(svals[jdx], s) * int(out[cols[jdx]])
                out[cols[idx]] = acc % mod
        return out


def phi(ops: Operators, a: Series) -> Series:
    return ops.phi(a)


def psi(ops: Operators, a: Series) -> Series:
    return ops.psi(a)


def gamma1_pow(ops: Operators, c: int, a: Series) -> Series:
    return ops.gamma1_pow(c, a)


def gamma2_pow(ops: Operators, c, a: Series) -> Series:
    return ops.gamma2_pow(c, a)


def gamma2_ratio(ops: Operators, c, a: Series) -> Series:
    return ops.gamma2_ratio(c, a)


def solve_phi_minus_one(ops: Operators, v: Series) -> Series:
    return ops.solve_phi_minus_one(v)


def base_operators(ring: SeriesRing, gp: GaloisParams) -> Operators:
    return Operators(ring, gp.chi_gamma1, gp.eta_n)


def level_operators(ring: SeriesRing, gp: GaloisParams) -> Operators:
    return Operators(ring, gp.chi_gamma1n, gp.eta_gamma2n)
